#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "qca/features.hpp"
#include "qca/text.hpp"
#include "test_helpers.hpp"

using namespace qca;
using namespace qca::testing;

TEST_CASE("feature sizes on the 4-node / 8-channel network") {
    Network net = Network::build(ring4_spec());
    const auto s1 = extract_features(net, 0, FeatureSubset::S1, 1, 10.0, 10);
    const auto s2 = extract_features(net, 0, FeatureSubset::S2, 1, 10.0, 10);
    const auto s3 = extract_features(net, 0, FeatureSubset::S3, 1, 10.0, 10);
    const auto s4 = extract_features(net, 0, FeatureSubset::S4, 1, 10.0, 10);
    CHECK(s1.size() == 76);  // 3 + 8*8 + 8 + 1
    CHECK(s2.size() == 20);  // 3 + 8 + 8 + 1
    CHECK(s3.size() == 28);  // 3 + 3*8 + 1
    CHECK(s4.size() == 28);
    // schema lengths agree with the extracted vectors
    for (auto subset : {FeatureSubset::S1, FeatureSubset::S2, FeatureSubset::S3, FeatureSubset::S4})
        CHECK(FeatureSchema::make(subset, net.link_count(), 8).size() ==
              extract_features(net, 0, subset, 1, 10.0, 10).size());
}

TEST_CASE("S4 length depends only on the channel count") {
    for (const TopologySpec& spec : {ring4_spec(), mesh6_spec(), nsf14_spec()}) {
        Network net = Network::build(spec);
        CHECK(extract_features(net, 0, FeatureSubset::S4, 1, 10.0, 10).size() == 3 + 3 * 8 + 1);
    }
    // and the fingerprint is topology-independent, unlike S1
    const auto fp4 = FeatureSchema::make(FeatureSubset::S4, 8, 8).fingerprint();
    const auto fp6 = FeatureSchema::make(FeatureSubset::S4, 16, 8).fingerprint();
    CHECK(fp4 == fp6);
    CHECK(FeatureSchema::make(FeatureSubset::S1, 8, 8).fingerprint() !=
          FeatureSchema::make(FeatureSubset::S1, 16, 8).fingerprint());
}

TEST_CASE("rht_path: maximum over the path") {
    Network net = Network::build(ring4_spec());
    // channel 2 occupied with different holding times on the 3 links of 0->3
    net.provision_data({0}, 2, 3, 0.0);
    net.provision_data({2}, 2, 7, 0.0);
    net.provision_data({4}, 2, 2, 0.0);
    const std::vector<int> path{0, 2, 4};
    CHECK(rht_path(net, 2, path, 20.0) == 7.0);
    // a free channel contributes zero everywhere
    CHECK(rht_path(net, 5, path, 20.0) == 0.0);
    // single-link path is the link's own RHT
    CHECK(rht_path(net, 2, std::vector<int>{2}, 20.0) == 7.0);
    // max property: path value >= every per-link value
    for (int lid : path) {
        const ChannelState& st = net.link(lid).channel(2);
        CHECK(rht_path(net, 2, path, 20.0) >= double(st.rht));
    }
}

TEST_CASE("rht_path: quantum channels carry the sentinel") {
    Network net = Network::build(ring4_spec());
    net.place_quantum(2, 5);
    const std::vector<int> path{0, 2};
    CHECK(rht_path(net, 5, path, 42.0) == 42.0);
}

TEST_CASE("normalized_tl: worked 4-node example") {
    Network net = Network::build(ring4_spec());
    // 12 ordered pairs, 3 of them route through the first MUX link
    CHECK(net.paths().link_usage_fraction[0] == 0.25);
    CHECK(normalized_tl(net, 0, 10.0) == 2.5);
    CHECK(normalized_tl(net, 0, 0.0) == 0.0);
}

TEST_CASE("normalized_tl: usage fractions sum to the average hop count") {
    for (const TopologySpec& spec : {ring4_spec(), mesh6_spec()}) {
        Network net = Network::build(spec);
        // independent oracle: enumerate ordered pairs and their DFS routes
        double hops = 0.0;
        int pairs = 0;
        for (int s = 0; s < net.node_count(); ++s)
            for (int d = 0; d < net.node_count(); ++d) {
                if (s == d) continue;
                hops += double(oracle_route_nodes(net, s, d).size() - 1);
                ++pairs;
            }
        const double avg_hops = hops / double(pairs);
        double sum = 0.0;
        for (int l = 0; l < net.link_count(); ++l) sum += normalized_tl(net, l, 1.0);
        CHECK(sum == doctest::Approx(avg_hops).epsilon(1e-12));
    }
}

TEST_CASE("extract: canonical ordering and state capture") {
    Network net = Network::build(ring4_spec());
    net.provision_data({0}, 2, 6, 3.0);  // ~2 mW on channel 2
    net.place_quantum(2, 7);             // a quantum channel on another link
    const int ts = 10;
    const auto v = extract_features(net, 0, FeatureSubset::S2, 4, 12.0, ts);
    REQUIRE(v.size() == 20);
    CHECK(v[0] == 5.0);    // link length
    CHECK(v[1] == 12.0);   // TL
    CHECK(v[2] == 10.0);   // TS
    CHECK(v[3 + 1] == 6.0);  // rht of channel 2
    CHECK(v[3 + 0] == 0.0);
    CHECK(v[11 + 1] == doctest::Approx(std::pow(10.0, 0.3)));  // 3 dBm in mW
    CHECK(v.back() == 4.0);  // candidate

    // S1 sees the other link's quantum channel as the 2*TS sentinel
    const auto s1 = extract_features(net, 0, FeatureSubset::S1, 4, 12.0, ts);
    CHECK(s1[std::size_t(3 + 2 * 8 + 6)] == 2.0 * ts);  // link 2, channel 7

    // S4 swaps TL for the normalized per-link load
    const auto s4 = extract_features(net, 0, FeatureSubset::S4, 4, 12.0, ts);
    CHECK(s4[1] == doctest::Approx(0.25 * 12.0));
}

TEST_CASE("extract: determinism and round-trip stability") {
    Network net = Network::build(ring4_spec());
    net.provision_data({0, 2}, 3, 5, -1.7);
    const auto a = extract_features(net, 0, FeatureSubset::S4, 2, 30.0, 10);
    const auto b = extract_features(net, 0, FeatureSubset::S4, 2, 30.0, 10);
    CHECK(a == b);
    // serialized vectors round-trip bit-exactly
    for (double x : a) CHECK(parse_double(fmt_double(x)) == x);
}

TEST_CASE("extract: rejects bad candidates and unreleased links") {
    Network net = Network::build(ring4_spec());
    net.provision_data({0}, 2, 6, 0.0);
    CHECK_THROWS_AS(extract_features(net, 0, FeatureSubset::S4, 2, 10.0, 10),
                    std::invalid_argument);  // occupied candidate
    CHECK_THROWS_AS(extract_features(net, 1, FeatureSubset::S4, 1, 10.0, 10),
                    std::invalid_argument);  // data-only link
    net.place_quantum(0, 5);
    CHECK_THROWS_AS(extract_features(net, 0, FeatureSubset::S4, 1, 10.0, 10),
                    std::invalid_argument);  // quantum channel not released
}

TEST_CASE("schema names: versioned golden order for S4") {
    const auto schema = FeatureSchema::make(FeatureSubset::S4, 8, 3);
    const std::vector<std::string> expected = {
        "link_length_km", "normalized_tl_erlang", "time_window_slots",
        "rht_ch1",        "rht_ch2",              "rht_ch3",
        "rht_path_ch1",   "rht_path_ch2",         "rht_path_ch3",
        "power_mw_ch1",   "power_mw_ch2",         "power_mw_ch3",
        "candidate_qch"};
    CHECK(schema.names == expected);
}
