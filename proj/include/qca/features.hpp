#pragma once
// Feature extraction for the channel-allocation predictor. Four fixed
// subsets are supported; the ordering of every subset is a versioned
// contract shared by dataset files and trained models.
//
//   S1: link length, TL, TS, RHT of every channel of every directed link,
//       Dch powers of the processing link, candidate channel.
//   S2: S1 with the RHT block reduced to the processing link.
//   S3: S2 plus the path-based RHT of each channel.
//   S4: S3 with TL replaced by the per-link normalized load.
//
// S4's length depends only on the channel count (3 + 3C + 1), which is
// what lets a model trained on one topology run on another.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qca/topology.hpp"

namespace qca {

enum class FeatureSubset { S1, S2, S3, S4 };

const char* feature_subset_name(FeatureSubset s);
FeatureSubset parse_feature_subset(const std::string& name);

struct FeatureSchema {
    FeatureSubset subset = FeatureSubset::S4;
    std::vector<std::string> names;

    std::size_t size() const { return names.size(); }
    std::uint64_t fingerprint() const;

    static FeatureSchema make(FeatureSubset subset, int n_links, int n_channels);
};

// Path-based residual holding time of a channel: the maximum RHT over the
// links of the path. Free channels contribute 0; quantum-occupied channels
// contribute `quantum_rht_sentinel` (they do not expire on their own).
double rht_path(const Network& net, int channel, std::span<const int> path_links,
                double quantum_rht_sentinel);

// Offered load weighted by the fraction of ordered source-destination
// pairs whose shortest path crosses the link.
double normalized_tl(const Network& net, int link, double tl);

// Feature vector for one candidate quantum channel on a MUX link whose own
// quantum channel has been released. Throws if the candidate is not free.
std::vector<double> extract_features(const Network& net, int link, FeatureSubset subset,
                                     int candidate_qch, double tl, int ts);

}  // namespace qca
