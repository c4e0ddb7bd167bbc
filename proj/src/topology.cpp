#include "qca/topology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qca/text.hpp"

namespace qca {

void TopologySpec::validate() const {
    if (node_count < 2) throw std::invalid_argument("topology: need at least 2 nodes");
    if (spans.empty()) throw std::invalid_argument("topology: no spans");
    if (channels_per_fiber < 2) throw std::invalid_argument("topology: channels_per_fiber must be >= 2");
    if (grid.base_thz <= 0 || grid.spacing_ghz <= 0)
        throw std::invalid_argument("topology: grid frequencies must be positive");
    for (const Span& s : spans) {
        if (s.a < 0 || s.a >= node_count || s.b < 0 || s.b >= node_count)
            throw std::invalid_argument("topology: span endpoint out of range");
        if (s.a == s.b) throw std::invalid_argument("topology: self-loop span");
        if (!(s.length_km > 0)) throw std::invalid_argument("topology: span length must be positive");
    }
    // connectivity over the undirected span graph
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count));
    for (const Span& s : spans) {
        adj[std::size_t(s.a)].push_back(s.b);
        adj[std::size_t(s.b)].push_back(s.a);
    }
    std::vector<char> seen(std::size_t(node_count), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : adj[std::size_t(u)]) {
            if (!seen[std::size_t(v)]) {
                seen[std::size_t(v)] = 1;
                ++reached;
                queue.push_back(v);
            }
        }
    }
    if (reached != node_count) throw std::invalid_argument("topology: graph is not connected");
}

TopologySpec TopologySpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open topology file: " + path);
    TopologySpec spec;
    spec.channels_per_fiber = 8;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto fail = [&](const std::string& what) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
        };
        if (key == "nodes") {
            if (!(ls >> spec.node_count)) fail("expected node count");
        } else if (key == "channels") {
            if (!(ls >> spec.channels_per_fiber)) fail("expected channel count");
        } else if (key == "grid_base_thz") {
            if (!(ls >> spec.grid.base_thz)) fail("expected grid base frequency");
        } else if (key == "grid_spacing_ghz") {
            if (!(ls >> spec.grid.spacing_ghz)) fail("expected grid spacing");
        } else if (key == "span") {
            Span s;
            int fwd = 0, bwd = 0;
            if (!(ls >> s.a >> s.b >> s.length_km >> fwd >> bwd))
                fail("expected: span <a> <b> <length_km> <mux_fwd> <mux_bwd>");
            s.mux_forward = fwd != 0;
            s.mux_backward = bwd != 0;
            spec.spans.push_back(s);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

void TopologySpec::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write topology file: " + path);
    out << "nodes " << node_count << "\n";
    out << "channels " << channels_per_fiber << "\n";
    out << "grid_base_thz " << fmt_double(grid.base_thz) << "\n";
    out << "grid_spacing_ghz " << fmt_double(grid.spacing_ghz) << "\n";
    for (const Span& s : spans)
        out << "span " << s.a << " " << s.b << " " << fmt_double(s.length_km) << " "
            << (s.mux_forward ? 1 : 0) << " " << (s.mux_backward ? 1 : 0) << "\n";
}

namespace {

// Minimum-hop path from src to dst, lexicographically smallest node
// sequence. Works from hop counts toward dst so the greedy forward walk is
// optimal at every step.
std::vector<int> shortest_path_links(const std::vector<Link>& links,
                                     const std::vector<std::vector<int>>& outgoing,
                                     int node_count, int src, int dst) {
    const int inf = std::numeric_limits<int>::max();
    std::vector<int> dist(std::size_t(node_count), inf);
    dist[std::size_t(dst)] = 0;
    std::deque<int> queue{dst};
    // BFS over reversed edges
    std::vector<std::vector<int>> incoming(static_cast<std::size_t>(node_count));
    for (const Link& l : links) incoming[std::size_t(l.to)].push_back(l.from);
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : incoming[std::size_t(u)]) {
            if (dist[std::size_t(v)] == inf) {
                dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
                queue.push_back(v);
            }
        }
    }
    if (dist[std::size_t(src)] == inf)
        throw std::runtime_error("shortest_path: destination unreachable");

    std::vector<int> path;
    int u = src;
    while (u != dst) {
        int best_link = -1;
        for (int lid : outgoing[std::size_t(u)]) {
            const Link& l = links[std::size_t(lid)];
            if (dist[std::size_t(l.to)] != dist[std::size_t(u)] - 1) continue;
            // outgoing is sorted by (to, id), so the first match is the
            // smallest next node (and smallest link id among parallels).
            best_link = lid;
            break;
        }
        path.push_back(best_link);
        u = links[std::size_t(best_link)].to;
    }
    return path;
}

std::shared_ptr<const PathTable> build_path_table(const std::vector<Link>& links,
                                                  const std::vector<std::vector<int>>& outgoing,
                                                  int node_count) {
    auto table = std::make_shared<PathTable>();
    table->node_count = node_count;
    table->link_pairs.resize(links.size());
    std::size_t total_hops = 0;
    for (int s = 0; s < node_count; ++s) {
        for (int d = 0; d < node_count; ++d) {
            if (s == d) continue;
            int pair_id = int(table->pairs.size());
            table->pairs.emplace_back(s, d);
            auto path = shortest_path_links(links, outgoing, node_count, s, d);
            total_hops += path.size();
            for (int lid : path) table->link_pairs[std::size_t(lid)].push_back(pair_id);
            table->pair_links.push_back(std::move(path));
        }
    }
    table->link_usage_fraction.resize(links.size());
    for (std::size_t i = 0; i < links.size(); ++i)
        table->link_usage_fraction[i] =
            double(table->link_pairs[i].size()) / double(table->pairs.size());
    table->average_hop_count = double(total_hops) / double(table->pairs.size());
    return table;
}

}  // namespace

Network Network::build(const TopologySpec& spec) {
    spec.validate();
    Network net;
    net.node_count_ = spec.node_count;
    net.channels_per_fiber_ = spec.channels_per_fiber;
    net.grid_ = spec.grid;
    net.links_.reserve(spec.spans.size() * 2);
    for (const Span& s : spec.spans) {
        Link fwd;
        fwd.id = int(net.links_.size());
        fwd.from = s.a;
        fwd.to = s.b;
        fwd.length_km = s.length_km;
        fwd.kind = s.mux_forward ? LinkKind::Mux : LinkKind::DataOnly;
        fwd.channels.resize(std::size_t(spec.channels_per_fiber));
        net.links_.push_back(std::move(fwd));

        Link bwd;
        bwd.id = int(net.links_.size());
        bwd.from = s.b;
        bwd.to = s.a;
        bwd.length_km = s.length_km;
        bwd.kind = s.mux_backward ? LinkKind::Mux : LinkKind::DataOnly;
        bwd.channels.resize(std::size_t(spec.channels_per_fiber));
        net.links_.push_back(std::move(bwd));
    }
    net.outgoing_.resize(std::size_t(spec.node_count));
    for (const Link& l : net.links_) net.outgoing_[std::size_t(l.from)].push_back(l.id);
    for (auto& out : net.outgoing_)
        std::sort(out.begin(), out.end(), [&](int x, int y) {
            const Link& a = net.links_[std::size_t(x)];
            const Link& b = net.links_[std::size_t(y)];
            return a.to != b.to ? a.to < b.to : a.id < b.id;
        });
    net.paths_ = build_path_table(net.links_, net.outgoing_, net.node_count_);
    return net;
}

Link& Network::mutable_link(int id) {
    if (id < 0 || id >= int(links_.size())) throw std::invalid_argument("bad link id");
    return links_[std::size_t(id)];
}

std::vector<int> Network::shortest_path(int src, int dst) const {
    if (src == dst) throw std::invalid_argument("shortest_path: src == dst");
    if (src < 0 || src >= node_count_ || dst < 0 || dst >= node_count_)
        throw std::invalid_argument("shortest_path: node out of range");
    return shortest_path_links(links_, outgoing_, node_count_, src, dst);
}

std::vector<Network::Release> Network::advance_timeslot() {
    std::vector<Release> released;
    std::vector<std::uint64_t> expired;
    for (Link& l : links_) {
        for (int ch = 1; ch <= channels_per_fiber_; ++ch) {
            ChannelState& st = l.channels[std::size_t(ch - 1)];
            if (st.use != ChannelUse::Data) continue;
            if (--st.rht == 0) {
                expired.push_back(st.lightpath_id);
                st = ChannelState{};
                released.push_back({l.id, ch});
            }
        }
    }
    if (!expired.empty()) {
        std::erase_if(lightpaths_, [&](const Lightpath& lp) {
            return std::find(expired.begin(), expired.end(), lp.id) != expired.end();
        });
    }
    ++timeslot_;
    return released;
}

std::vector<int> Network::available_channels(int link) const {
    const Link& l = this->link(link);
    if (!l.is_mux()) throw std::invalid_argument("available_channels: not a MUX link");
    std::vector<int> out;
    for (int ch = 1; ch <= channels_per_fiber_; ++ch)
        if (l.channels[std::size_t(ch - 1)].use == ChannelUse::Free) out.push_back(ch);
    return out;
}

std::uint64_t Network::provision_data(const std::vector<int>& path, int wavelength,
                                      int holding_slots, double power_dbm) {
    if (path.empty()) throw std::invalid_argument("provision_data: empty path");
    if (wavelength < 1 || wavelength > channels_per_fiber_)
        throw std::invalid_argument("provision_data: wavelength out of range");
    if (holding_slots < 1) throw std::invalid_argument("provision_data: holding_slots < 1");
    for (int lid : path)
        if (link(lid).channel(wavelength).use != ChannelUse::Free)
            throw std::invalid_argument("provision_data: channel not free");

    const double power_mw = std::pow(10.0, power_dbm / 10.0);
    std::uint64_t id = next_lightpath_id_++;
    for (int lid : path) {
        ChannelState& st = mutable_link(lid).channels[std::size_t(wavelength - 1)];
        st.use = ChannelUse::Data;
        st.rht = holding_slots;
        st.power_mw = power_mw;
        st.lightpath_id = id;
    }
    lightpaths_.push_back({id, path, wavelength, holding_slots, power_dbm});
    return id;
}

void Network::place_quantum(int link, int channel) {
    Link& l = mutable_link(link);
    if (!l.is_mux()) throw std::invalid_argument("place_quantum: not a MUX link");
    if (channel < 1 || channel > channels_per_fiber_)
        throw std::invalid_argument("place_quantum: channel out of range");
    ChannelState& st = l.channels[std::size_t(channel - 1)];
    if (st.use != ChannelUse::Free) throw std::invalid_argument("place_quantum: channel not free");
    st = ChannelState{};
    st.use = ChannelUse::Quantum;
    l.quantum_channels.insert(
        std::lower_bound(l.quantum_channels.begin(), l.quantum_channels.end(), channel), channel);
}

void Network::release_quantum(int link, int channel) {
    Link& l = mutable_link(link);
    ChannelState& st = l.channels[std::size_t(channel - 1)];
    if (st.use != ChannelUse::Quantum)
        throw std::invalid_argument("release_quantum: channel is not quantum-occupied");
    st = ChannelState{};
    l.quantum_channels.erase(
        std::find(l.quantum_channels.begin(), l.quantum_channels.end(), channel));
}

std::vector<int> Network::release_all_quantum(int link) {
    Link& l = mutable_link(link);
    std::vector<int> released = l.quantum_channels;
    for (int ch : released) l.channels[std::size_t(ch - 1)] = ChannelState{};
    l.quantum_channels.clear();
    return released;
}

int Network::data_channel_count() const {
    int n = 0;
    for (const Link& l : links_)
        for (const ChannelState& st : l.channels)
            if (st.use == ChannelUse::Data) ++n;
    return n;
}

std::uint64_t Network::state_digest() const {
    std::string buf;
    auto put64 = [&buf](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(char(v >> (i * 8)));
    };
    put64(std::uint64_t(timeslot_));
    put64(next_lightpath_id_);
    put64(std::uint64_t(links_.size()));
    for (const Link& l : links_) {
        for (const ChannelState& st : l.channels) {
            buf.push_back(char(st.use));
            put64(std::uint64_t(st.rht));
            put64(std::bit_cast<std::uint64_t>(st.power_mw));
            put64(st.lightpath_id);
        }
        put64(std::uint64_t(l.quantum_channels.size()));
        for (int ch : l.quantum_channels) put64(std::uint64_t(ch));
    }
    put64(std::uint64_t(lightpaths_.size()));
    for (const Lightpath& lp : lightpaths_) {
        put64(lp.id);
        put64(std::uint64_t(lp.wavelength));
        for (int lid : lp.links) put64(std::uint64_t(lid));
    }
    return fnv1a(buf);
}

}  // namespace qca
