#pragma once
// Noise powers at the quantum receiver (spontaneous Raman scattering,
// four-wave mixing, multiplexer crosstalk), their conversion to detector
// click probabilities, and the asymptotic decoy-state GLLP lower bound on
// the secure key rate.
//
// Units are spelled out in every field name. Noise coefficients are
// calibration defaults for a standard SMF C-band system; they can be
// overridden through a parameter file without code changes.

#include <span>
#include <string>
#include <vector>

#include "qca/topology.hpp"

namespace qca {

inline constexpr double kPlanckJs = 6.62607015e-34;

// Spontaneous Raman scattering coefficient rho(delta_lambda) in
// 1/(km*nm), tabulated on the Stokes side (pump at shorter wavelength than
// the quantum channel) and scaled by anti_stokes_factor on the other side.
// Lookup interpolates linearly and clamps outside the tabulated range.
struct RamanProfile {
    std::vector<double> shift_nm;        // ascending, >= 0
    std::vector<double> rho_per_km_nm;   // same length
    double anti_stokes_factor = 0.8;

    double value(double delta_lambda_nm) const;
    void validate() const;
    static RamanProfile default_profile();
};

struct QkdParams {
    double gate_rate_hz = 1e7;                  // detector gate frequency
    double detector_efficiency = 0.10;
    double dark_count_prob = 3e-6;              // per gate
    double gate_duration_s = 500e-12;
    double visibility = 0.95;                   // interferometer visibility
    double filter_bandwidth_ghz = 15.0;         // receiver filter
    double dwdm_insertion_loss_db = 8.0;
    double fiber_attenuation_db_per_km = 0.2;
    double mean_photon_number = 0.5;            // signal state
    double nonlinear_coefficient_per_w_km = 1.3;
    double dispersion_ps_nm_km = 17.0;
    double error_correction_efficiency = 1.16;
    double sifting_factor = 0.5;
    double mux_isolation_db = 110.0;            // adjacent-channel suppression
    RamanProfile raman = RamanProfile::default_profile();

    void validate() const;
    static QkdParams load_file(const std::string& path);  // JSON, partial overrides
    void save_file(const std::string& path) const;
};

// One classical channel as seen by the noise models.
struct DchSignal {
    int channel = 0;             // 1-based grid index
    double power_w = 0.0;        // launch power
    double wavelength_m = 0.0;
};

// Occupied Data channels of one link, with grid-derived wavelengths.
std::vector<DchSignal> collect_dch_signals(const Link& link, const ChannelGrid& grid);

struct NoiseBreakdown {
    double raman_w = 0.0;
    double fwm_w = 0.0;
    double crosstalk_w = 0.0;
    double p_noise_click = 0.0;  // per gate
    double total_w() const { return raman_w + fwm_w + crosstalk_w; }
};

struct GainQber {
    double gain_q_mu = 0.0;
    double qber_e_mu = 0.0;
};

struct SkrEstimate {
    double gain_q_mu = 0.0;
    double qber_e_mu = 0.0;
    double single_photon_gain_q1 = 0.0;
    double single_photon_error_e1 = 0.0;
    double rate_bps = 0.0;
};

// Forward (co-propagating) spontaneous Raman power within the receiver
// filter band: sum over pumps of P_c * e^{-alpha L} * L * rho(dl) * dl_f.
double raman_noise_power_w(std::span<const DchSignal> dchs, double qch_wavelength_m,
                           double length_km, const QkdParams& params);

// Partially degenerate four-wave mixing power landing on the quantum
// channel. Pump pairs (i, j) with a populated partner at k = i + j - q
// contribute (eta/9) * D^2 * gamma^2 * Pi Pj Pk * e^{-alpha L} * Leff^2,
// D = 3 for i == j and 6 otherwise, with dispersion phase matching.
double fwm_noise_power_w(std::span<const DchSignal> dchs, int qch_channel,
                         const ChannelGrid& grid, double length_km, const QkdParams& params);

// Adjacent-channel leakage through the demultiplexer; non-adjacent
// channels are treated as fully suppressed.
double crosstalk_noise_power_w(std::span<const DchSignal> dchs, int qch_channel,
                               const QkdParams& params, double isolation_db);

// Probability per detection gate that filtered noise power produces a
// click: min(1, P/(h nu) * t_gate * eta_d).
double noise_click_probability(double noise_w, double qch_wavelength_m, const QkdParams& params);

double binary_entropy(double x);

// Overall gain and QBER of the signal state for a channel with the given
// total loss (fiber plus insertion) and per-gate noise click probability.
GainQber gain_and_qber(double channel_loss_db, double p_noise, const QkdParams& params);

// Asymptotic infinite-decoy GLLP rate, clamped at zero.
SkrEstimate skr_gllp(const GainQber& gq, double channel_loss_db, double p_noise,
                     const QkdParams& params);

// Composition over the current occupancy of one MUX link.
NoiseBreakdown link_noise(const Network& net, int link, int qch_channel, const QkdParams& params);
SkrEstimate evaluate_link_skr(const Network& net, int link, int qch_channel,
                              const QkdParams& params);

}  // namespace qca
