#pragma once
// Quantum-channel allocation strategies: the fixed-band baseline, the
// threshold-triggered performance-predicting baseline, the periodic
// ML-predicted reallocation, and a clairvoyant oracle used as an upper
// bound in tests.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qca/dataset.hpp"
#include "qca/features.hpp"
#include "qca/gbdt.hpp"
#include "qca/qkd_physics.hpp"
#include "qca/topology.hpp"

namespace qca {

enum class StrategyKind { FixedBand, PerfPredict, MlNsca, Oracle };

const char* strategy_name(StrategyKind k);
StrategyKind parse_strategy(const std::string& name);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::FixedBand;
    int ts = 10;                 // reallocation window (MlNsca / Oracle)
    double threshold_bps = 0.0;  // PerfPredict
    FeatureSubset subset = FeatureSubset::S4;
    int qch_count = 1;           // quantum channels per MUX link

    void validate() const;
};

struct ReallocStats {
    std::int64_t events = 0;       // reallocation decisions taken
    std::int64_t moves = 0;        // decisions that changed a channel
    std::int64_t suspensions = 0;  // quantum channels left unplaced
};

// Pins channels 1..qch_count on every MUX link. All strategies start from
// this placement.
void initial_qch_placement(Network& net, int qch_count);

struct PpStepResult {
    bool reallocated = false;
    int from_channel = 0;
    int to_channel = 0;
};

// One per-slot check of one MUX link: keep the quantum channel while its
// instantaneous SKR meets the threshold, otherwise move it to the free
// channel with the smallest total noise power (ties to the lowest index).
// Keeps when no alternative exists.
std::vector<PpStepResult> pp_step(Network& net, int link, double threshold_bps,
                                  const QkdParams& qkd);

// Periodic reallocation of every MUX link in id order: release, rank every
// available candidate by predicted p_opt, assign the top qch_count ("first
// i optimal channels in turn"). Ties go to the lowest channel index.
void ml_nsca_reallocate(Network& net, const GbdtModel& model, FeatureSubset subset, int ts,
                        double tl, int qch_count, ReallocStats& stats);

// Clairvoyant choice for one link: simulates every available candidate
// against the known future window and returns them ranked by window-mean
// SKR (best first, ties to the lowest index).
std::vector<int> oracle_rank_channels(const Network& net, int link,
                                      const std::vector<Request>& future_window, int ts,
                                      const QkdParams& qkd);

void oracle_reallocate(Network& net, const std::vector<Request>& future_window, int ts,
                       const QkdParams& qkd, int qch_count, ReallocStats& stats);

struct PpCalibration {
    double threshold_bps = 0.0;
    std::int64_t achieved_moves = 0;
    bool saturated = false;  // target unreachable even at the boundary
    int iterations = 0;
};

// Bisection over the threshold until the measured reallocation count
// matches the target within the tolerance. `count_at` must be monotone
// non-decreasing in the threshold.
PpCalibration calibrate_pp_threshold(const std::function<std::int64_t(double)>& count_at,
                                     std::int64_t target, double theta_hi,
                                     double tolerance_frac = 0.05, int max_iterations = 40);

}  // namespace qca
