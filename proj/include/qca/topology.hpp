#pragma once
// Directed-link DWDM network state: topology, per-link per-channel
// occupancy, quantum-channel placement and the timeslot clock.
//
// Channel indexing convention: channels are 1-based and channel 1 sits at
// the lowest frequency offset on the grid (base frequency). The fixed-band
// baseline pins its quantum channel to channel 1.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace qca {

inline constexpr double kSpeedOfLightMps = 299792458.0;

enum class ChannelUse : std::uint8_t { Free = 0, Data = 1, Quantum = 2 };
enum class LinkKind : std::uint8_t { DataOnly = 0, Mux = 1 };

struct ChannelState {
    ChannelUse use = ChannelUse::Free;
    int rht = 0;                     // remaining holding time in slots (Data only)
    double power_mw = 0.0;           // launch power (Data only)
    std::uint64_t lightpath_id = 0;  // owner (Data only)
};

struct ChannelGrid {
    double base_thz = 193.1;   // frequency of channel 1
    double spacing_ghz = 200.0;

    double frequency_hz(int channel) const {
        return base_thz * 1e12 + double(channel - 1) * spacing_ghz * 1e9;
    }
    double wavelength_m(int channel) const { return kSpeedOfLightMps / frequency_hz(channel); }
};

struct Span {
    int a = 0, b = 0;
    double length_km = 0.0;
    bool mux_forward = true;   // a->b carries a quantum channel
    bool mux_backward = false;
};

struct TopologySpec {
    int node_count = 0;
    std::vector<Span> spans;
    int channels_per_fiber = 8;
    ChannelGrid grid;

    void validate() const;  // throws std::invalid_argument
    static TopologySpec load_file(const std::string& path);
    void save_file(const std::string& path) const;
};

struct Link {
    int id = 0;
    int from = 0, to = 0;
    double length_km = 0.0;
    LinkKind kind = LinkKind::DataOnly;
    std::vector<ChannelState> channels;  // channels[i] holds channel i+1
    std::vector<int> quantum_channels;   // ascending; Mux links only

    bool is_mux() const { return kind == LinkKind::Mux; }
    const ChannelState& channel(int ch) const { return channels[std::size_t(ch - 1)]; }
};

struct Lightpath {
    std::uint64_t id = 0;
    std::vector<int> links;  // in path order
    int wavelength = 0;      // same on every link (continuity)
    int holding_slots = 0;   // as requested
    double power_dbm = 0.0;
};

// Topology-static routing facts. Shortest paths are minimum-hop with ties
// broken toward the lexicographically smallest node sequence, so every
// derived quantity here is deterministic.
struct PathTable {
    int node_count = 0;
    std::vector<std::pair<int, int>> pairs;     // all ordered (src, dst), src != dst
    std::vector<std::vector<int>> pair_links;   // shortest path (link ids) per pair
    std::vector<std::vector<int>> link_pairs;   // pair indices routed through each link
    std::vector<double> link_usage_fraction;    // p_m = |link_pairs| / |pairs|
    double average_hop_count = 0.0;
};

class Network {
public:
    static Network build(const TopologySpec& spec);

    int node_count() const { return node_count_; }
    int channels_per_fiber() const { return channels_per_fiber_; }
    const ChannelGrid& grid() const { return grid_; }
    const std::vector<Link>& links() const { return links_; }
    const Link& link(int id) const { return links_[std::size_t(id)]; }
    int link_count() const { return int(links_.size()); }
    std::int64_t timeslot() const { return timeslot_; }
    const PathTable& paths() const { return *paths_; }
    const std::vector<Lightpath>& active_lightpaths() const { return lightpaths_; }

    // Minimum-hop path as an ordered list of link ids; ties resolved to the
    // lexicographically smallest node sequence.
    std::vector<int> shortest_path(int src, int dst) const;

    struct Release {
        int link = 0;
        int channel = 0;
    };
    // Decrements every Data channel's rht; channels reaching zero become
    // Free and are reported. Quantum channels are untouched.
    std::vector<Release> advance_timeslot();

    // Free channels (1-based, ascending) of a MUX link. Throws on data-only links.
    std::vector<int> available_channels(int link) const;

    // Occupies `wavelength` as Data on every link of `path`. All of those
    // channels must be Free. Returns the new lightpath id.
    std::uint64_t provision_data(const std::vector<int>& path, int wavelength,
                                 int holding_slots, double power_dbm);

    void place_quantum(int link, int channel);
    void release_quantum(int link, int channel);
    std::vector<int> release_all_quantum(int link);

    int data_channel_count() const;

    // Digest of the full mutable state; equal digests mean bitwise-equal
    // serialized state. Used by the determinism checks.
    std::uint64_t state_digest() const;

private:
    int node_count_ = 0;
    int channels_per_fiber_ = 0;
    ChannelGrid grid_;
    std::vector<Link> links_;
    std::vector<std::vector<int>> outgoing_;  // node -> link ids, sorted by (to, id)
    std::int64_t timeslot_ = 0;
    std::uint64_t next_lightpath_id_ = 1;
    std::vector<Lightpath> lightpaths_;
    std::shared_ptr<const PathTable> paths_;  // shared by copies

    Link& mutable_link(int id);
};

}  // namespace qca
