#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "qca/rng.hpp"
#include "qca/topology.hpp"
#include "test_helpers.hpp"

using namespace qca;
using namespace qca::testing;

namespace {

std::vector<int> path_nodes(const Network& net, int src, const std::vector<int>& links) {
    std::vector<int> nodes{src};
    for (int lid : links) nodes.push_back(net.link(lid).to);
    return nodes;
}

}  // namespace

TEST_CASE("build_topology: 4-node ring") {
    Network net = Network::build(ring4_spec());
    CHECK(net.link_count() == 8);
    CHECK(net.node_count() == 4);
    int slots = 0;
    for (const Link& l : net.links()) {
        slots += int(l.channels.size());
        for (const ChannelState& st : l.channels) CHECK(st.use == ChannelUse::Free);
    }
    CHECK(slots == 64);
    CHECK(net.timeslot() == 0);
    // forward links MUX, backward data-only
    CHECK(net.link(0).is_mux());
    CHECK(!net.link(1).is_mux());
    // grid frequencies ascend with the channel index
    CHECK(net.grid().frequency_hz(1) == doctest::Approx(193.1e12));
    CHECK(net.grid().frequency_hz(2) - net.grid().frequency_hz(1) == doctest::Approx(200e9));
}

TEST_CASE("build_topology: minimal 2-node span") {
    Network net = Network::build(two_node_spec());
    CHECK(net.link_count() == 2);
}

TEST_CASE("build_topology: 14-node NSFNet has 2 links per span") {
    TopologySpec spec = nsf14_spec();
    Network net = Network::build(spec);
    CHECK(net.link_count() == 2 * int(spec.spans.size()));
    CHECK(net.link_count() == 42);
}

TEST_CASE("build_topology: rejects invalid specs") {
    TopologySpec disconnected;
    disconnected.node_count = 4;
    disconnected.spans = {{0, 1, 10, true, false}, {2, 3, 10, true, false}};
    CHECK_THROWS_AS(Network::build(disconnected), std::invalid_argument);

    TopologySpec too_few_channels = ring4_spec();
    too_few_channels.channels_per_fiber = 1;
    CHECK_THROWS_AS(Network::build(too_few_channels), std::invalid_argument);

    TopologySpec zero_length = ring4_spec();
    zero_length.spans[0].length_km = 0;
    CHECK_THROWS_AS(Network::build(zero_length), std::invalid_argument);
}

TEST_CASE("shortest_path: adjacent nodes take the single link") {
    Network net = Network::build(ring4_spec());
    const auto path = net.shortest_path(0, 1);
    REQUIRE(path.size() == 1);
    CHECK(net.link(path[0]).from == 0);
    CHECK(net.link(path[0]).to == 1);
}

TEST_CASE("shortest_path: ring tie-break matches the enumeration oracle") {
    Network net = Network::build(ring4_spec());
    for (int s = 0; s < 4; ++s) {
        for (int d = 0; d < 4; ++d) {
            if (s == d) continue;
            const auto got = path_nodes(net, s, net.shortest_path(s, d));
            CHECK(got == oracle_route_nodes(net, s, d));
        }
    }
    // opposite corners: two hops through the smaller middle node
    const auto diag = net.shortest_path(0, 2);
    CHECK(diag.size() == 2);
    CHECK(path_nodes(net, 0, diag) == std::vector<int>{0, 1, 2});
}

TEST_CASE("shortest_path: mesh6 agrees with the enumeration oracle") {
    Network net = Network::build(mesh6_spec());
    for (int s = 0; s < 6; ++s)
        for (int d = 0; d < 6; ++d) {
            if (s == d) continue;
            CHECK(path_nodes(net, s, net.shortest_path(s, d)) == oracle_route_nodes(net, s, d));
        }
}

TEST_CASE("shortest_path: src == dst rejected") {
    Network net = Network::build(ring4_spec());
    CHECK_THROWS_AS(net.shortest_path(1, 1), std::invalid_argument);
}

TEST_CASE("advance_timeslot: expiry, decrement, quantum untouched") {
    Network net = Network::build(ring4_spec());
    net.provision_data({0}, 1, 1, 0.0);  // rht = 1
    net.provision_data({2}, 1, 5, 0.0);  // rht = 5
    net.place_quantum(0, 8);

    auto released = net.advance_timeslot();
    REQUIRE(released.size() == 1);
    CHECK(released[0].link == 0);
    CHECK(released[0].channel == 1);
    CHECK(net.link(0).channel(1).use == ChannelUse::Free);
    CHECK(net.link(2).channel(1).use == ChannelUse::Data);
    CHECK(net.link(2).channel(1).rht == 4);
    CHECK(net.timeslot() == 1);

    for (int i = 0; i < 10; ++i) net.advance_timeslot();
    CHECK(net.link(0).channel(8).use == ChannelUse::Quantum);
    CHECK(net.link(2).channel(1).use == ChannelUse::Free);
}

TEST_CASE("available_channels") {
    Network net = Network::build(ring4_spec());
    CHECK(net.available_channels(0) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
    net.provision_data({0}, 2, 3, 0.0);
    net.provision_data({0}, 3, 3, 0.0);
    CHECK(net.available_channels(0) == std::vector<int>{1, 4, 5, 6, 7, 8});
    for (int ch : {1, 4, 5, 6, 7, 8}) net.provision_data({0}, ch, 3, 0.0);
    CHECK(net.available_channels(0).empty());
    // data-only link
    CHECK_THROWS_AS(net.available_channels(1), std::invalid_argument);
}

TEST_CASE("state machine: only legal transitions under a random event mix") {
    Network net = Network::build(ring4_spec());
    Rng rng(7);
    auto snapshot_states = [&net]() {
        std::vector<ChannelUse> v;
        for (const Link& l : net.links())
            for (const ChannelState& st : l.channels) v.push_back(st.use);
        return v;
    };
    auto before = snapshot_states();
    for (int step = 0; step < 400; ++step) {
        const int action = rng.uniform_int(0, 3);
        if (action == 0) {
            const int src = rng.uniform_int(0, 3);
            int dst = rng.uniform_int(0, 2);
            if (dst >= src) ++dst;
            const auto path = net.shortest_path(src, dst);
            for (int w = 1; w <= 8; ++w) {
                bool free = true;
                for (int lid : path)
                    if (net.link(lid).channel(w).use != ChannelUse::Free) free = false;
                if (free) {
                    net.provision_data(path, w, rng.uniform_int(1, 6), 0.0);
                    break;
                }
            }
        } else if (action == 1) {
            const int link = 2 * rng.uniform_int(0, 3);  // forward links are MUX
            const auto avail = net.available_channels(link);
            if (!avail.empty() && net.link(link).quantum_channels.empty())
                net.place_quantum(link, avail.front());
        } else if (action == 2) {
            const int link = 2 * rng.uniform_int(0, 3);
            net.release_all_quantum(link);
        } else {
            net.advance_timeslot();
        }
        auto after = snapshot_states();
        for (std::size_t i = 0; i < after.size(); ++i) {
            const ChannelUse a = before[i], b = after[i];
            if (a == b) continue;
            const bool legal = (a == ChannelUse::Free && b == ChannelUse::Data) ||
                               (a == ChannelUse::Data && b == ChannelUse::Free) ||
                               (a == ChannelUse::Free && b == ChannelUse::Quantum) ||
                               (a == ChannelUse::Quantum && b == ChannelUse::Free);
            CHECK(legal);
        }
        // conservation: Data channel slots == sum of active lightpath hops
        int hops = 0;
        for (const Lightpath& lp : net.active_lightpaths()) hops += int(lp.links.size());
        CHECK(net.data_channel_count() == hops);
        before = std::move(after);
    }
}

TEST_CASE("determinism: identical event sequences give identical digests") {
    auto run = []() {
        Network net = Network::build(ring4_spec());
        net.place_quantum(0, 1);
        net.provision_data({0, 2}, 2, 4, -1.5);
        net.provision_data({4}, 1, 2, 3.25);
        net.advance_timeslot();
        net.advance_timeslot();
        net.release_all_quantum(0);
        net.place_quantum(0, 5);
        return net.state_digest();
    };
    CHECK(run() == run());
}

TEST_CASE("topology file round-trip") {
    const TopologySpec spec = mesh6_spec();
    spec.save_file("test_mesh6.topo");
    const TopologySpec loaded = TopologySpec::load_file("test_mesh6.topo");
    CHECK(loaded.node_count == spec.node_count);
    REQUIRE(loaded.spans.size() == spec.spans.size());
    for (std::size_t i = 0; i < spec.spans.size(); ++i) {
        CHECK(loaded.spans[i].a == spec.spans[i].a);
        CHECK(loaded.spans[i].b == spec.spans[i].b);
        CHECK(loaded.spans[i].length_km == spec.spans[i].length_km);
        CHECK(loaded.spans[i].mux_forward == spec.spans[i].mux_forward);
    }
    CHECK(loaded.channels_per_fiber == spec.channels_per_fiber);
}
