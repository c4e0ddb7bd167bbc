#include <doctest.h>

#include <cmath>
#include <vector>

#include "qca/qkd_physics.hpp"
#include "qca/rng.hpp"
#include "test_helpers.hpp"

using namespace qca;
using namespace qca::testing;

namespace {

constexpr double kC = 299792458.0;
constexpr double kH = 6.62607015e-34;

// flat Raman coefficient so closed-form oracles stay single expressions
QkdParams flat_raman_params(double rho) {
    QkdParams q;
    q.raman.shift_nm = {0.0};
    q.raman.rho_per_km_nm = {rho};
    q.raman.anti_stokes_factor = 1.0;
    return q;
}

// Independent per-triple FWM product power (hand-translated closed form).
double oracle_fwm_triple(double pi_w, double pj_w, double pk_w, bool degenerate,
                         double df_ik_hz, double df_jk_hz, double length_km, const QkdParams& q,
                         double lambda_q_m) {
    const double alpha = q.fiber_attenuation_db_per_km * std::log(10.0) / 10.0;  // 1/km
    const double att = std::exp(-alpha * length_km);
    const double leff = (1.0 - att) / alpha;  // km
    const double beta2_s2_km =
        q.dispersion_ps_nm_km * 1e-6 * lambda_q_m * lambda_q_m / (2.0 * M_PI * kC) * 1e3;
    const double dbeta = beta2_s2_km * 4.0 * M_PI * M_PI * df_ik_hz * df_jk_hz;  // 1/km
    const double s = std::sin(dbeta * length_km / 2.0);
    const double eta = alpha * alpha / (alpha * alpha + dbeta * dbeta) *
                       (1.0 + 4.0 * att * s * s / ((1.0 - att) * (1.0 - att)));
    const double d = degenerate ? 3.0 : 6.0;
    const double g = q.nonlinear_coefficient_per_w_km;
    return eta / 9.0 * d * d * g * g * pi_w * pj_w * pk_w * att * leff * leff;
}

// Exhaustive grid enumeration: every (i, j, k) with i <= j over the whole
// grid, occupancy checked against the dch list, frequency matching done in
// grid indices.
double oracle_fwm_total(const std::vector<DchSignal>& dchs, int qch, const ChannelGrid& grid,
                        int n_channels, double length_km, const QkdParams& q) {
    auto power_of = [&dchs](int ch) {
        for (const DchSignal& d : dchs)
            if (d.channel == ch) return d.power_w;
        return 0.0;
    };
    double total = 0.0;
    for (int i = 1; i <= n_channels; ++i) {
        for (int j = i; j <= n_channels; ++j) {
            for (int k = 1; k <= n_channels; ++k) {
                if (i + j - k != qch) continue;
                const double pi = power_of(i), pj = power_of(j), pk = power_of(k);
                if (pi <= 0 || pj <= 0 || pk <= 0) continue;
                if (k == qch) continue;
                total += oracle_fwm_triple(pi, pj, pk, i == j, double(i - k) * grid.spacing_ghz * 1e9,
                                           double(j - k) * grid.spacing_ghz * 1e9, length_km, q,
                                           grid.wavelength_m(qch));
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("raman: no pumps, no noise") {
    QkdParams q;
    CHECK(raman_noise_power_w({}, 1550e-9, 20.0, q) == 0.0);
}

TEST_CASE("raman: linear in every pump power") {
    QkdParams q;
    ChannelGrid grid;
    std::vector<DchSignal> dchs = {{2, 1e-3, grid.wavelength_m(2)},
                                   {5, 0.4e-3, grid.wavelength_m(5)}};
    std::vector<DchSignal> doubled = dchs;
    for (DchSignal& d : doubled) d.power_w *= 2.0;
    const double base = raman_noise_power_w(dchs, grid.wavelength_m(8), 20.0, q);
    const double twice = raman_noise_power_w(doubled, grid.wavelength_m(8), 20.0, q);
    CHECK(base > 0.0);
    CHECK(twice == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("raman: closed-form scalar oracle at 20 km") {
    // P = 1 mW, L = 20 km, alpha = 0.2 dB/km, rho = 2e-9 (km nm)^-1
    const QkdParams q = flat_raman_params(2e-9);
    ChannelGrid grid;
    const double lambda_q = grid.wavelength_m(8);
    std::vector<DchSignal> dchs = {{1, 1e-3, grid.wavelength_m(1)}};
    const double got = raman_noise_power_w(dchs, lambda_q, 20.0, q);

    const double filter_nm = lambda_q * lambda_q * 15e9 / kC * 1e9;
    const double expected =
        1e-3 * std::exp(-0.2 * std::log(10.0) / 10.0 * 20.0) * 20.0 * 2e-9 * filter_nm;
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    // filter width at 1550 nm is ~0.12 nm
    CHECK(filter_nm == doctest::Approx(0.12).epsilon(0.02));
}

TEST_CASE("raman: profile interpolates and clamps outside the table") {
    RamanProfile p;
    p.shift_nm = {1.0, 3.0};
    p.rho_per_km_nm = {4e-10, 2e-10};
    p.anti_stokes_factor = 0.5;
    CHECK(p.value(2.0) == doctest::Approx(3e-10));   // midpoint
    CHECK(p.value(0.1) == doctest::Approx(4e-10));   // clamp low
    CHECK(p.value(50.0) == doctest::Approx(2e-10));  // clamp high
    CHECK(p.value(-2.0) == doctest::Approx(1.5e-10));  // anti-Stokes scaling
}

TEST_CASE("fwm: fewer than two pumps cannot mix") {
    QkdParams q;
    ChannelGrid grid;
    CHECK(fwm_noise_power_w({}, 4, grid, 20.0, q) == 0.0);
    std::vector<DchSignal> one = {{2, 1e-3, grid.wavelength_m(2)}};
    CHECK(fwm_noise_power_w(one, 4, grid, 20.0, q) == 0.0);
}

TEST_CASE("fwm: grid miss yields zero") {
    QkdParams q;
    ChannelGrid grid;
    // pumps at 1 and 2, quantum channel at 8: no i + j - k = q triple among
    // occupied channels
    std::vector<DchSignal> dchs = {{1, 1e-3, grid.wavelength_m(1)},
                                   {2, 1e-3, grid.wavelength_m(2)}};
    CHECK(fwm_noise_power_w(dchs, 8, grid, 20.0, q) == 0.0);
}

TEST_CASE("fwm: triple enumeration matches the brute-force grid oracle") {
    QkdParams q;
    ChannelGrid grid;
    SUBCASE("three pumps around the quantum channel") {
        std::vector<DchSignal> dchs = {{3, 1e-3, grid.wavelength_m(3)},
                                       {5, 0.5e-3, grid.wavelength_m(5)},
                                       {6, 2e-3, grid.wavelength_m(6)}};
        const int qch = 4;
        const double got = fwm_noise_power_w(dchs, qch, grid, 20.0, q);
        const double expected = oracle_fwm_total(dchs, qch, grid, 8, 20.0, q);
        CHECK(got > 0.0);
        CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("random occupancy patterns") {
        Rng rng(31);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<DchSignal> dchs;
            int qch = rng.uniform_int(1, 8);
            for (int ch = 1; ch <= 8; ++ch) {
                if (ch == qch || rng.uniform01() < 0.5) continue;
                dchs.push_back({ch, rng.uniform(0.1e-3, 3e-3), grid.wavelength_m(ch)});
            }
            const double got = fwm_noise_power_w(dchs, qch, grid, 15.0, q);
            const double expected = oracle_fwm_total(dchs, qch, grid, 8, 15.0, q);
            CHECK(got == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("fwm: cubic in a global power scale") {
    QkdParams q;
    ChannelGrid grid;
    std::vector<DchSignal> dchs = {{3, 1e-3, grid.wavelength_m(3)},
                                   {5, 1e-3, grid.wavelength_m(5)},
                                   {6, 1e-3, grid.wavelength_m(6)}};
    std::vector<DchSignal> scaled = dchs;
    for (DchSignal& d : scaled) d.power_w *= 1.7;
    const double base = fwm_noise_power_w(dchs, 4, grid, 20.0, q);
    const double up = fwm_noise_power_w(scaled, 4, grid, 20.0, q);
    CHECK(base > 0.0);
    CHECK(up == doctest::Approx(base * 1.7 * 1.7 * 1.7).epsilon(1e-12));
}

TEST_CASE("crosstalk: direct dB arithmetic") {
    QkdParams q;
    ChannelGrid grid;
    std::vector<DchSignal> dchs = {{3, 1e-3, grid.wavelength_m(3)}};
    // one adjacent 0 dBm channel at 100 dB isolation -> 1e-13 W
    CHECK(crosstalk_noise_power_w(dchs, 4, q, 100.0) == doctest::Approx(1e-13).epsilon(1e-12));
    // suppression limit
    CHECK(crosstalk_noise_power_w(dchs, 4, q, 300.0) < 1e-30);
    // nothing adjacent
    CHECK(crosstalk_noise_power_w(dchs, 6, q, 100.0) == 0.0);
    // linear in pump power
    std::vector<DchSignal> twice = {{3, 2e-3, grid.wavelength_m(3)}};
    CHECK(crosstalk_noise_power_w(twice, 4, q, 100.0) ==
          doctest::Approx(2e-13).epsilon(1e-12));
}

TEST_CASE("noise click probability: photon-energy oracle") {
    QkdParams q;
    CHECK(noise_click_probability(0.0, 1550e-9, q) == 0.0);
    // independent expression: P * lambda / (h c) * t_gate * eta_d
    const double expected = 1e-12 * 1550e-9 / (kH * kC) * 500e-12 * 0.1;
    CHECK(expected == doctest::Approx(3.9014e-4).epsilon(1e-3));
    CHECK(noise_click_probability(1e-12, 1550e-9, q) ==
          doctest::Approx(expected).epsilon(1e-12));
    // monotone and capped
    CHECK(noise_click_probability(2e-12, 1550e-9, q) >=
          noise_click_probability(1e-12, 1550e-9, q));
    CHECK(noise_click_probability(1.0, 1550e-9, q) == 1.0);
}

TEST_CASE("binary entropy identities") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    for (double x : {0.01, 0.1, 0.23, 0.37, 0.49})
        CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1.0 - x)).epsilon(1e-12));
}

TEST_CASE("gain_and_qber: visibility floor at zero noise and zero dark counts") {
    QkdParams q;
    q.dark_count_prob = 0.0;  // not a valid config value, but a valid model input
    const GainQber gq = gain_and_qber(12.0, 0.0, q);
    CHECK(gq.qber_e_mu == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("gain_and_qber: closed-form oracle at 12 dB") {
    QkdParams q;
    const GainQber gq = gain_and_qber(12.0, 0.0, q);
    const double eta = std::pow(10.0, -1.2) * 0.1;
    const double expected_q = 1.0 - (1.0 - 3e-6) * std::exp(-0.5 * eta);
    const double expected_e =
        (0.5 * 3e-6 + 0.025 * (1.0 - std::exp(-0.5 * eta))) / expected_q;
    CHECK(gq.gain_q_mu == doctest::Approx(expected_q).epsilon(1e-12));
    CHECK(gq.qber_e_mu == doctest::Approx(expected_e).epsilon(1e-12));
}

TEST_CASE("gain_and_qber: saturation asymptote") {
    QkdParams q;
    const GainQber gq = gain_and_qber(12.0, 0.9, q);
    CHECK(gq.qber_e_mu > 0.45);
    CHECK(gq.qber_e_mu <= 0.5 + 1e-12);
}

TEST_CASE("skr_gllp: entropy saturation clamps to zero") {
    QkdParams q;
    GainQber gq{0.5, 0.5};
    CHECK(skr_gllp(gq, 12.0, 0.4, q).rate_bps == 0.0);
}

TEST_CASE("skr_gllp: non-increasing in the noise click probability") {
    QkdParams q;
    double last = 1e18;
    for (double p : {0.0, 1e-5, 1e-4, 3e-4, 1e-3, 1e-2}) {
        const GainQber gq = gain_and_qber(12.0, p, q);
        const double r = skr_gllp(gq, 12.0, p, q).rate_bps;
        CHECK(r <= last + 1e-9);
        last = r;
    }
}

TEST_CASE("skr_gllp: dark-count-limited rate at 25 km is in the calibrated range") {
    // lightly loaded 25 km MUX link: a couple of 0 dBm data channels
    TopologySpec spec = two_node_spec();
    spec.spans[0].length_km = 25.0;
    Network net = Network::build(spec);
    net.provision_data({0}, 2, 5, 0.0);
    net.provision_data({0}, 4, 5, 0.0);
    QkdParams q;
    const double rate = evaluate_link_skr(net, 0, 8, q).rate_bps;
    CHECK(rate >= 4400.0 / 3.0);
    CHECK(rate <= 4400.0 * 3.0);
}

TEST_CASE("evaluate_link_skr: symmetric on an empty link") {
    Network net = Network::build(ring4_spec());
    QkdParams q;
    const double first = evaluate_link_skr(net, 0, 1, q).rate_bps;
    CHECK(first > 0.0);
    for (int ch = 2; ch <= 8; ++ch)
        CHECK(evaluate_link_skr(net, 0, ch, q).rate_bps == doctest::Approx(first).epsilon(1e-12));
}

TEST_CASE("evaluate_link_skr: adding a data channel never helps any candidate") {
    Network net = Network::build(ring4_spec());
    QkdParams q;
    std::vector<double> before(9, 0.0);
    for (int ch = 1; ch <= 8; ++ch) before[std::size_t(ch)] = evaluate_link_skr(net, 0, ch, q).rate_bps;
    net.provision_data({0}, 4, 9, 2.0);
    for (int ch = 1; ch <= 8; ++ch) {
        if (ch == 4) continue;
        CHECK(evaluate_link_skr(net, 0, ch, q).rate_bps <= before[std::size_t(ch)] + 1e-12);
    }
}

TEST_CASE("evaluate_link_skr: matches recomposition from the sub-operations") {
    Network net = Network::build(ring4_spec());
    QkdParams q;
    net.provision_data({2}, 2, 9, 1.0);
    net.provision_data({2}, 3, 9, -2.0);
    net.provision_data({2}, 6, 9, 4.0);
    const Link& l = net.link(2);
    const auto dchs = collect_dch_signals(l, net.grid());
    std::vector<std::pair<double, int>> direct, recomposed;
    for (int ch : {1, 4, 5, 7, 8}) {
        const double lambda_q = net.grid().wavelength_m(ch);
        const double noise = raman_noise_power_w(dchs, lambda_q, l.length_km, q) +
                             fwm_noise_power_w(dchs, ch, net.grid(), l.length_km, q) +
                             crosstalk_noise_power_w(dchs, ch, q, q.mux_isolation_db);
        const double p_noise = noise_click_probability(noise, lambda_q, q);
        const double loss = q.fiber_attenuation_db_per_km * l.length_km + q.dwdm_insertion_loss_db;
        const GainQber gq = gain_and_qber(loss, p_noise, q);
        recomposed.push_back({skr_gllp(gq, loss, p_noise, q).rate_bps, ch});
        direct.push_back({evaluate_link_skr(net, 2, ch, q).rate_bps, ch});
    }
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(direct[i].first == doctest::Approx(recomposed[i].first).epsilon(1e-12));
    // identical ranking
    std::sort(direct.begin(), direct.end());
    std::sort(recomposed.begin(), recomposed.end());
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(direct[i].second == recomposed[i].second);
}

TEST_CASE("skr monotone non-increasing in length and dark counts") {
    QkdParams q;
    TopologySpec spec = two_node_spec();
    double last = 1e18;
    for (double len : {5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0}) {
        spec.spans[0].length_km = len;
        Network net = Network::build(spec);
        net.provision_data({0}, 3, 5, 0.0);
        const double r = evaluate_link_skr(net, 0, 6, q).rate_bps;
        CHECK(r <= last + 1e-9);
        last = r;
    }
    last = 1e18;
    for (double dark : {1e-7, 1e-6, 3e-6, 1e-5, 1e-4, 1e-3}) {
        QkdParams qd;
        qd.dark_count_prob = dark;
        const GainQber gq = gain_and_qber(12.0, 1e-5, qd);
        const double r = skr_gllp(gq, 12.0, 1e-5, qd).rate_bps;
        CHECK(r <= last + 1e-9);
        last = r;
    }
}

TEST_CASE("noise components are non-negative on random inputs") {
    QkdParams q;
    ChannelGrid grid;
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<DchSignal> dchs;
        const int qch = rng.uniform_int(1, 8);
        for (int ch = 1; ch <= 8; ++ch) {
            if (ch == qch || rng.uniform01() < 0.4) continue;
            dchs.push_back({ch, rng.uniform(1e-5, 5e-3), grid.wavelength_m(ch)});
        }
        const double len = rng.uniform(1.0, 60.0);
        CHECK(raman_noise_power_w(dchs, grid.wavelength_m(qch), len, q) >= 0.0);
        CHECK(fwm_noise_power_w(dchs, qch, grid, len, q) >= 0.0);
        CHECK(crosstalk_noise_power_w(dchs, qch, q, q.mux_isolation_db) >= 0.0);
    }
}

TEST_CASE("physics parameter file round-trip with overrides") {
    QkdParams q;
    q.visibility = 0.97;
    q.mux_isolation_db = 95.0;
    q.raman.anti_stokes_factor = 0.7;
    q.save_file("test_qkd_params.json");
    const QkdParams loaded = QkdParams::load_file("test_qkd_params.json");
    CHECK(loaded.visibility == 0.97);
    CHECK(loaded.mux_isolation_db == 95.0);
    CHECK(loaded.raman.anti_stokes_factor == 0.7);
    CHECK(loaded.gate_rate_hz == q.gate_rate_hz);
}
