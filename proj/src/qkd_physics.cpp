#include "qca/qkd_physics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qca {

namespace {
constexpr double kLn10Over10 = 0.23025850929940457;  // dB -> 1/e units
constexpr double kTwoPi = 6.283185307179586;
}  // namespace

RamanProfile RamanProfile::default_profile() {
    // Calibration defaults: strongest near the pump (thermally enhanced
    // small-shift scattering), decaying with separation. Magnitudes give
    // noise click rates comparable to dark counts for sub-mW pumps over
    // metro distances.
    RamanProfile p;
    p.shift_nm = {0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 25.0, 50.0};
    p.rho_per_km_nm = {2.0e-10, 1.7e-10, 1.45e-10, 1.15e-10, 9.5e-11,
                       8.0e-11, 6.5e-11, 5.5e-11, 4.5e-11, 3.5e-11};
    p.anti_stokes_factor = 0.8;
    return p;
}

void RamanProfile::validate() const {
    if (shift_nm.empty() || shift_nm.size() != rho_per_km_nm.size())
        throw std::invalid_argument("raman profile: table shape mismatch");
    for (std::size_t i = 0; i < shift_nm.size(); ++i) {
        if (shift_nm[i] < 0 || rho_per_km_nm[i] < 0)
            throw std::invalid_argument("raman profile: negative entry");
        if (i > 0 && shift_nm[i] <= shift_nm[i - 1])
            throw std::invalid_argument("raman profile: shifts must be ascending");
    }
    if (anti_stokes_factor < 0 || anti_stokes_factor > 1)
        throw std::invalid_argument("raman profile: anti_stokes_factor outside [0,1]");
}

double RamanProfile::value(double delta_lambda_nm) const {
    const double scale = delta_lambda_nm < 0 ? anti_stokes_factor : 1.0;
    const double shift = std::abs(delta_lambda_nm);
    if (shift <= shift_nm.front()) return scale * rho_per_km_nm.front();
    if (shift >= shift_nm.back()) return scale * rho_per_km_nm.back();
    auto it = std::upper_bound(shift_nm.begin(), shift_nm.end(), shift);
    std::size_t hi = std::size_t(it - shift_nm.begin());
    std::size_t lo = hi - 1;
    const double t = (shift - shift_nm[lo]) / (shift_nm[hi] - shift_nm[lo]);
    return scale * (rho_per_km_nm[lo] + t * (rho_per_km_nm[hi] - rho_per_km_nm[lo]));
}

void QkdParams::validate() const {
    auto prob = [](double v, const char* name) {
        if (!(v > 0) || v > 1)
            throw std::invalid_argument(std::string("qkd: ") + name + " outside (0,1]");
    };
    prob(detector_efficiency, "detector_efficiency");
    prob(dark_count_prob, "dark_count_prob");
    prob(visibility, "visibility");
    prob(sifting_factor, "sifting_factor");
    if (!(gate_rate_hz > 0)) throw std::invalid_argument("qkd: gate_rate_hz must be positive");
    if (!(gate_duration_s > 0)) throw std::invalid_argument("qkd: gate_duration_s must be positive");
    if (!(filter_bandwidth_ghz > 0))
        throw std::invalid_argument("qkd: filter_bandwidth_ghz must be positive");
    if (dwdm_insertion_loss_db < 0) throw std::invalid_argument("qkd: insertion loss must be >= 0");
    if (fiber_attenuation_db_per_km < 0) throw std::invalid_argument("qkd: attenuation must be >= 0");
    if (!(mean_photon_number > 0))
        throw std::invalid_argument("qkd: mean_photon_number must be positive");
    if (nonlinear_coefficient_per_w_km < 0) throw std::invalid_argument("qkd: gamma must be >= 0");
    if (dispersion_ps_nm_km < 0) throw std::invalid_argument("qkd: dispersion must be >= 0");
    if (error_correction_efficiency < 1) throw std::invalid_argument("qkd: f_EC must be >= 1");
    if (mux_isolation_db < 0) throw std::invalid_argument("qkd: isolation must be >= 0");
    raman.validate();
}

QkdParams QkdParams::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open physics parameter file: " + path);
    nlohmann::json j;
    in >> j;
    QkdParams p;  // defaults, then partial overrides
    auto get = [&j](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("gate_rate_hz", p.gate_rate_hz);
    get("detector_efficiency", p.detector_efficiency);
    get("dark_count_prob", p.dark_count_prob);
    get("gate_duration_s", p.gate_duration_s);
    get("visibility", p.visibility);
    get("filter_bandwidth_ghz", p.filter_bandwidth_ghz);
    get("dwdm_insertion_loss_db", p.dwdm_insertion_loss_db);
    get("fiber_attenuation_db_per_km", p.fiber_attenuation_db_per_km);
    get("mean_photon_number", p.mean_photon_number);
    get("nonlinear_coefficient_per_w_km", p.nonlinear_coefficient_per_w_km);
    get("dispersion_ps_nm_km", p.dispersion_ps_nm_km);
    get("error_correction_efficiency", p.error_correction_efficiency);
    get("sifting_factor", p.sifting_factor);
    get("mux_isolation_db", p.mux_isolation_db);
    if (j.contains("raman_profile")) {
        const auto& r = j.at("raman_profile");
        p.raman.shift_nm = r.at("shift_nm").get<std::vector<double>>();
        p.raman.rho_per_km_nm = r.at("rho_per_km_nm").get<std::vector<double>>();
        if (r.contains("anti_stokes_factor"))
            p.raman.anti_stokes_factor = r.at("anti_stokes_factor").get<double>();
    }
    p.validate();
    return p;
}

void QkdParams::save_file(const std::string& path) const {
    nlohmann::json j;
    j["gate_rate_hz"] = gate_rate_hz;
    j["detector_efficiency"] = detector_efficiency;
    j["dark_count_prob"] = dark_count_prob;
    j["gate_duration_s"] = gate_duration_s;
    j["visibility"] = visibility;
    j["filter_bandwidth_ghz"] = filter_bandwidth_ghz;
    j["dwdm_insertion_loss_db"] = dwdm_insertion_loss_db;
    j["fiber_attenuation_db_per_km"] = fiber_attenuation_db_per_km;
    j["mean_photon_number"] = mean_photon_number;
    j["nonlinear_coefficient_per_w_km"] = nonlinear_coefficient_per_w_km;
    j["dispersion_ps_nm_km"] = dispersion_ps_nm_km;
    j["error_correction_efficiency"] = error_correction_efficiency;
    j["sifting_factor"] = sifting_factor;
    j["mux_isolation_db"] = mux_isolation_db;
    j["raman_profile"] = {{"shift_nm", raman.shift_nm},
                          {"rho_per_km_nm", raman.rho_per_km_nm},
                          {"anti_stokes_factor", raman.anti_stokes_factor}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write physics parameter file: " + path);
    out << j.dump(2) << "\n";
}

std::vector<DchSignal> collect_dch_signals(const Link& link, const ChannelGrid& grid) {
    std::vector<DchSignal> out;
    for (std::size_t i = 0; i < link.channels.size(); ++i) {
        const ChannelState& st = link.channels[i];
        if (st.use != ChannelUse::Data) continue;
        const int ch = int(i) + 1;
        out.push_back({ch, st.power_mw * 1e-3, grid.wavelength_m(ch)});
    }
    return out;
}

double raman_noise_power_w(std::span<const DchSignal> dchs, double qch_wavelength_m,
                           double length_km, const QkdParams& params) {
    if (!(length_km > 0)) throw std::invalid_argument("raman: length must be positive");
    const double alpha = params.fiber_attenuation_db_per_km * kLn10Over10;  // 1/km
    const double propagation_km = std::exp(-alpha * length_km) * length_km;
    // receiver filter width in nm at the quantum wavelength
    const double filter_nm = qch_wavelength_m * qch_wavelength_m *
                             (params.filter_bandwidth_ghz * 1e9) / kSpeedOfLightMps * 1e9;
    double total = 0.0;
    for (const DchSignal& d : dchs) {
        const double dl_nm = (qch_wavelength_m - d.wavelength_m) * 1e9;
        total += d.power_w * propagation_km * params.raman.value(dl_nm) * filter_nm;
    }
    return total;
}

double fwm_noise_power_w(std::span<const DchSignal> dchs, int qch_channel,
                         const ChannelGrid& grid, double length_km, const QkdParams& params) {
    if (dchs.size() < 2) return 0.0;  // a mixing product needs two pumps and a partner
    const double alpha_km = params.fiber_attenuation_db_per_km * kLn10Over10;
    const double attenuation = std::exp(-alpha_km * length_km);
    const double leff_km = alpha_km > 0 ? (1.0 - attenuation) / alpha_km : length_km;
    const double gamma = params.nonlinear_coefficient_per_w_km;  // 1/(W km)
    const double lambda_q = grid.wavelength_m(qch_channel);
    // beta2 in s^2/km
    const double dispersion_si = params.dispersion_ps_nm_km * 1e-6;  // s/m^2
    const double beta2_km =
        dispersion_si * lambda_q * lambda_q / (kTwoPi * kSpeedOfLightMps) * 1e3;
    const double alpha_sq = alpha_km * alpha_km;
    const double denom = (1.0 - attenuation) * (1.0 - attenuation);

    // power index by channel for the k lookup
    int max_channel = 0;
    for (const DchSignal& d : dchs) max_channel = std::max(max_channel, d.channel);
    std::vector<double> power_at(std::size_t(max_channel) + 1, 0.0);
    for (const DchSignal& d : dchs) power_at[std::size_t(d.channel)] = d.power_w;
    auto occupied_power = [&](int ch) -> double {
        if (ch < 1 || ch >= int(power_at.size())) return 0.0;
        return power_at[std::size_t(ch)];
    };

    const double spacing_hz = grid.spacing_ghz * 1e9;
    double total = 0.0;
    for (std::size_t a = 0; a < dchs.size(); ++a) {
        for (std::size_t b = a; b < dchs.size(); ++b) {
            const int i = dchs[a].channel;
            const int j = dchs[b].channel;
            const int k = i + j - qch_channel;
            if (k == qch_channel) continue;  // partner slot is the quantum channel itself
            const double pk = occupied_power(k);
            if (pk <= 0) continue;
            const double degeneracy = (i == j) ? 3.0 : 6.0;
            const double df_ik = double(i - k) * spacing_hz;
            const double df_jk = double(j - k) * spacing_hz;
            const double delta_beta = beta2_km * kTwoPi * kTwoPi * df_ik * df_jk;  // 1/km
            double eta = 1.0;
            if (alpha_sq + delta_beta * delta_beta > 0) {
                eta = alpha_sq / (alpha_sq + delta_beta * delta_beta);
                if (denom > 0) {
                    const double s = std::sin(delta_beta * length_km / 2.0);
                    eta *= 1.0 + 4.0 * attenuation * s * s / denom;
                }
            }
            total += (eta / 9.0) * degeneracy * degeneracy * gamma * gamma * dchs[a].power_w *
                     dchs[b].power_w * pk * attenuation * leff_km * leff_km;
        }
    }
    return total;
}

double crosstalk_noise_power_w(std::span<const DchSignal> dchs, int qch_channel,
                               const QkdParams& params, double isolation_db) {
    (void)params;
    if (isolation_db < 0) throw std::invalid_argument("crosstalk: isolation must be >= 0");
    const double leakage = std::pow(10.0, -isolation_db / 10.0);
    double total = 0.0;
    for (const DchSignal& d : dchs)
        if (std::abs(d.channel - qch_channel) == 1) total += d.power_w * leakage;
    return total;
}

double noise_click_probability(double noise_w, double qch_wavelength_m, const QkdParams& params) {
    if (noise_w < 0) throw std::invalid_argument("noise_click_probability: negative power");
    const double photon_energy_j = kPlanckJs * kSpeedOfLightMps / qch_wavelength_m;
    const double p =
        noise_w / photon_energy_j * params.gate_duration_s * params.detector_efficiency;
    return std::min(1.0, p);
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

GainQber gain_and_qber(double channel_loss_db, double p_noise, const QkdParams& params) {
    if (channel_loss_db < 0) throw std::invalid_argument("gain_and_qber: negative loss");
    const double eta =
        std::pow(10.0, -channel_loss_db / 10.0) * params.detector_efficiency;
    const double background = params.dark_count_prob + p_noise;
    const double e0 = 0.5;
    const double e_det = (1.0 - params.visibility) / 2.0;
    GainQber gq;
    const double signal = 1.0 - std::exp(-params.mean_photon_number * eta);
    gq.gain_q_mu = 1.0 - (1.0 - background) * std::exp(-params.mean_photon_number * eta);
    gq.qber_e_mu =
        gq.gain_q_mu > 0 ? (e0 * background + e_det * signal) / gq.gain_q_mu : 0.5;
    return gq;
}

SkrEstimate skr_gllp(const GainQber& gq, double channel_loss_db, double p_noise,
                     const QkdParams& params) {
    const double eta =
        std::pow(10.0, -channel_loss_db / 10.0) * params.detector_efficiency;
    const double background = params.dark_count_prob + p_noise;
    const double e0 = 0.5;
    const double e_det = (1.0 - params.visibility) / 2.0;
    const double mu = params.mean_photon_number;

    SkrEstimate est;
    est.gain_q_mu = gq.gain_q_mu;
    est.qber_e_mu = gq.qber_e_mu;
    const double y1 = background + eta - background * eta;
    est.single_photon_gain_q1 = mu * std::exp(-mu) * y1;
    est.single_photon_error_e1 = y1 > 0 ? (e0 * background + e_det * eta) / y1 : 0.5;
    const double rate = params.sifting_factor * params.gate_rate_hz *
                        (-gq.gain_q_mu * params.error_correction_efficiency *
                             binary_entropy(gq.qber_e_mu) +
                         est.single_photon_gain_q1 *
                             (1.0 - binary_entropy(est.single_photon_error_e1)));
    est.rate_bps = std::max(0.0, rate);
    return est;
}

NoiseBreakdown link_noise(const Network& net, int link, int qch_channel,
                          const QkdParams& params) {
    const Link& l = net.link(link);
    if (!l.is_mux()) throw std::invalid_argument("link_noise: not a MUX link");
    if (qch_channel < 1 || qch_channel > net.channels_per_fiber())
        throw std::invalid_argument("link_noise: channel out of range");
    const auto dchs = collect_dch_signals(l, net.grid());
    const double lambda_q = net.grid().wavelength_m(qch_channel);
    NoiseBreakdown nb;
    nb.raman_w = raman_noise_power_w(dchs, lambda_q, l.length_km, params);
    nb.fwm_w = fwm_noise_power_w(dchs, qch_channel, net.grid(), l.length_km, params);
    nb.crosstalk_w = crosstalk_noise_power_w(dchs, qch_channel, params, params.mux_isolation_db);
    nb.p_noise_click = noise_click_probability(nb.total_w(), lambda_q, params);
    return nb;
}

SkrEstimate evaluate_link_skr(const Network& net, int link, int qch_channel,
                              const QkdParams& params) {
    const NoiseBreakdown nb = link_noise(net, link, qch_channel, params);
    const Link& l = net.link(link);
    const double loss_db =
        params.fiber_attenuation_db_per_km * l.length_km + params.dwdm_insertion_loss_db;
    const GainQber gq = gain_and_qber(loss_db, nb.p_noise_click, params);
    return skr_gllp(gq, loss_db, nb.p_noise_click, params);
}

}  // namespace qca
