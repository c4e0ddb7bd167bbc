#pragma once
// Monte-Carlo labeling of candidate quantum channels and assembly of
// (features, p_opt) training rows, plus CSV persistence with a schema
// descriptor sidecar.

#include <cstdint>
#include <string>
#include <vector>

#include "qca/features.hpp"
#include "qca/gbdt.hpp"
#include "qca/qkd_physics.hpp"
#include "qca/topology.hpp"
#include "qca/traffic.hpp"

namespace qca {

struct McConfig {
    int n_sets = 200;      // independent future-traffic draws
    int window_slots = 10; // TS
    std::uint64_t seed = 1;

    void validate() const;
};

struct LabelResult {
    std::vector<int> candidates;  // ascending channel indices
    std::vector<int> counts;      // wins per candidate; sums to n_sets
    int n_sets = 0;

    double p_opt(std::size_t i) const { return double(counts[i]) / double(n_sets); }
    std::size_t argmax_index() const;  // ties resolved to the lowest channel
};

// Future traffic for one labeling draw: arrival slots are 1..window_slots
// relative to the snapshot. Deterministic per seed, shared by every
// candidate within the draw (common random numbers).
std::vector<Request> draw_window_traffic(const TrafficParams& params, int node_count,
                                         int window_slots, std::uint64_t seed);

// Mean SKR of `link` over the window when `candidate` carries its quantum
// channel, starting from a copy of the snapshot and provisioning the given
// future arrivals.
double window_mean_skr(Network net, int link, int candidate,
                       const std::vector<Request>& window, int window_slots,
                       const QkdParams& qkd);

// Algorithm: for each draw, simulate every available candidate against the
// identical future traffic, award one count to the channel with the
// highest window-mean SKR (ties to the lowest index). The snapshot's link
// must have its quantum channel released and at least one free channel.
LabelResult monte_carlo_label(const Network& snapshot, int link, const McConfig& mc,
                              const TrafficParams& traffic, const QkdParams& qkd);

struct DatasetGenConfig {
    TopologySpec topology;
    std::vector<double> tl_values = {10.0, 20.0, 30.0};
    std::vector<int> ts_values = {10};
    double mean_holding_slots = 10.0;
    double power_min_dbm = -5.0;
    double power_max_dbm = 5.0;
    QkdParams qkd;
    FeatureSubset subset = FeatureSubset::S4;
    int n_events = 100;          // labeled reallocation events
    int n_sets = 200;
    int events_per_segment = 40; // one segment = one fresh simulation at a (TL, TS) point
    int warmup_slots = 50;
    std::uint64_t seed = 1;

    void validate() const;
};

struct TrainingSet {
    FeatureSchema schema;
    DataMatrix features;
    std::vector<double> targets;    // p_opt per row
    std::vector<int> event_ids;     // rows of one reallocation event share an id
    int n_events = 0;
    int n_sets = 0;
};

// Runs the dynamic simulation, labeling every MUX link at each
// reallocation slot until n_events events have been collected. The live
// trajectory continues with the labeled-optimal channel.
TrainingSet generate_dataset(const DatasetGenConfig& cfg);

// CSV: event_id, <feature columns per schema>, p_opt. A JSON descriptor
// (same path + ".schema.json") carries the subset tag, column names,
// fingerprint and row/event counts.
void save_dataset_csv(const TrainingSet& ds, const std::string& path);
TrainingSet load_dataset_csv(const std::string& path);

// Deterministic split by event (hash of the event id against the seed).
std::pair<TrainingSet, TrainingSet> split_by_event(const TrainingSet& ds, double test_fraction,
                                                   std::uint64_t seed);

}  // namespace qca
