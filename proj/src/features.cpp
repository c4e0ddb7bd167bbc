#include "qca/features.hpp"

#include <algorithm>
#include <stdexcept>

#include "qca/text.hpp"

namespace qca {

const char* feature_subset_name(FeatureSubset s) {
    switch (s) {
        case FeatureSubset::S1: return "S1";
        case FeatureSubset::S2: return "S2";
        case FeatureSubset::S3: return "S3";
        case FeatureSubset::S4: return "S4";
    }
    return "?";
}

FeatureSubset parse_feature_subset(const std::string& name) {
    if (name == "S1" || name == "s1") return FeatureSubset::S1;
    if (name == "S2" || name == "s2") return FeatureSubset::S2;
    if (name == "S3" || name == "s3") return FeatureSubset::S3;
    if (name == "S4" || name == "s4") return FeatureSubset::S4;
    throw std::invalid_argument("unknown feature subset: " + name);
}

std::uint64_t FeatureSchema::fingerprint() const {
    std::string blob = feature_subset_name(subset);
    blob += '|';
    blob += fmt_int(std::int64_t(names.size()));
    for (const std::string& n : names) {
        blob += '|';
        blob += n;
    }
    return fnv1a(blob);
}

FeatureSchema FeatureSchema::make(FeatureSubset subset, int n_links, int n_channels) {
    FeatureSchema schema;
    schema.subset = subset;
    auto& names = schema.names;
    names.push_back("link_length_km");
    names.push_back(subset == FeatureSubset::S4 ? "normalized_tl_erlang" : "traffic_load_erlang");
    names.push_back("time_window_slots");
    if (subset == FeatureSubset::S1) {
        for (int l = 0; l < n_links; ++l)
            for (int c = 1; c <= n_channels; ++c)
                names.push_back("rht_link" + std::to_string(l) + "_ch" + std::to_string(c));
    } else {
        for (int c = 1; c <= n_channels; ++c) names.push_back("rht_ch" + std::to_string(c));
        if (subset == FeatureSubset::S3 || subset == FeatureSubset::S4)
            for (int c = 1; c <= n_channels; ++c)
                names.push_back("rht_path_ch" + std::to_string(c));
    }
    for (int c = 1; c <= n_channels; ++c) names.push_back("power_mw_ch" + std::to_string(c));
    names.push_back("candidate_qch");
    return schema;
}

namespace {

double channel_rht(const ChannelState& st, double quantum_sentinel) {
    switch (st.use) {
        case ChannelUse::Free: return 0.0;
        case ChannelUse::Data: return double(st.rht);
        case ChannelUse::Quantum: return quantum_sentinel;
    }
    return 0.0;
}

}  // namespace

double rht_path(const Network& net, int channel, std::span<const int> path_links,
                double quantum_rht_sentinel) {
    if (path_links.empty()) throw std::invalid_argument("rht_path: empty path");
    double m = 0.0;
    for (int lid : path_links)
        m = std::max(m, channel_rht(net.link(lid).channel(channel), quantum_rht_sentinel));
    return m;
}

double normalized_tl(const Network& net, int link, double tl) {
    if (tl < 0) throw std::invalid_argument("normalized_tl: negative load");
    return net.paths().link_usage_fraction[std::size_t(link)] * tl;
}

std::vector<double> extract_features(const Network& net, int link, FeatureSubset subset,
                                     int candidate_qch, double tl, int ts) {
    const Link& l = net.link(link);
    if (!l.is_mux()) throw std::invalid_argument("extract_features: not a MUX link");
    if (!l.quantum_channels.empty())
        throw std::invalid_argument("extract_features: quantum channel not released");
    if (candidate_qch < 1 || candidate_qch > net.channels_per_fiber() ||
        l.channel(candidate_qch).use != ChannelUse::Free)
        throw std::invalid_argument("extract_features: candidate channel not available");

    const int channels = net.channels_per_fiber();
    const double sentinel = 2.0 * double(ts);  // quantum channels never expire on their own

    std::vector<double> v;
    v.push_back(l.length_km);
    v.push_back(subset == FeatureSubset::S4 ? normalized_tl(net, link, tl) : tl);
    v.push_back(double(ts));

    if (subset == FeatureSubset::S1) {
        for (const Link& other : net.links())
            for (const ChannelState& st : other.channels)
                v.push_back(channel_rht(st, sentinel));
    } else {
        for (int c = 1; c <= channels; ++c) v.push_back(channel_rht(l.channel(c), sentinel));
        if (subset == FeatureSubset::S3 || subset == FeatureSubset::S4) {
            // mean path RHT over every ordered-pair shortest path that
            // crosses the link (a link is always on at least its own
            // one-hop path)
            const PathTable& table = net.paths();
            const auto& pair_ids = table.link_pairs[std::size_t(link)];
            for (int c = 1; c <= channels; ++c) {
                double sum = 0.0;
                for (int pid : pair_ids)
                    sum += rht_path(net, c, table.pair_links[std::size_t(pid)], sentinel);
                v.push_back(sum / double(pair_ids.size()));
            }
        }
    }

    for (int c = 1; c <= channels; ++c) {
        const ChannelState& st = l.channel(c);
        v.push_back(st.use == ChannelUse::Data ? st.power_mw : 0.0);
    }
    v.push_back(double(candidate_qch));
    return v;
}

}  // namespace qca
