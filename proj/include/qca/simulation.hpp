#pragma once
// The timeslot loop (arrivals -> provisioning -> strategy step -> SKR
// sampling), repetition aggregation, parameter sweeps with paired seeds,
// model evaluation, and the threshold calibration wrapper.

#include <array>
#include <iosfwd>
#include <vector>

#include "qca/dataset.hpp"
#include "qca/scenario.hpp"

namespace qca {

struct RunMetrics {
    double mean_skr_bps = 0.0;
    double ci95_bps = 0.0;  // normal-approximation half width over repetitions
    std::vector<double> per_link_mean_skr;  // MUX links, id order
    double blocking_probability = 0.0;
    std::int64_t realloc_events = 0;
    std::int64_t realloc_moves = 0;
    std::int64_t suspensions = 0;
    std::int64_t offered_requests = 0;
    std::int64_t blocked_requests = 0;
    std::int64_t total_slots = 0;
    std::vector<double> repetition_means;
    std::vector<double> slot_trace;  // first repetition only, when recorded
    double wall_clock_s = 0.0;
};

// Runs n_repetitions independent repetitions with seeds derived from
// (seed, repetition) and aggregates. The repetition traffic streams depend
// only on the scenario seed, so different strategies on the same config
// consume identical arrivals.
RunMetrics run_experiment(const ScenarioConfig& cfg, const GbdtModel* model);

struct SweepRow {
    std::string axis;
    double value = 0.0;
    StrategyKind strategy = StrategyKind::FixedBand;
    RunMetrics metrics;
};

// axis is one of: TL, TS, link_length, qch_count.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const std::string& axis,
                                const std::vector<double>& values,
                                const std::vector<StrategyKind>& strategies,
                                const GbdtModel* model);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_metrics_csv(const RunMetrics& m, const ScenarioConfig& cfg, std::ostream& out);

struct EvalReport {
    double rmse = 0.0;
    int n_rows = 0;
    int n_events = 0;
    double coincident_overall = 0.0;
    // events grouped by the gap between the two largest labels:
    // <20%, [20,40]%, (40,60]%, >60%
    std::array<int, 4> group_events{};
    std::array<double, 4> group_fraction{};
    std::array<double, 4> coincident_by_group{};
};

EvalReport evaluate_model(const GbdtModel& model, const TrainingSet& test);
void write_eval_csv(const EvalReport& r, std::ostream& out);

// Runs the PP strategy on the scenario at candidate thresholds until its
// total reallocation count over all repetitions matches the target (the
// count observed in an ML run on the same seeds).
PpCalibration calibrate_pp_for_scenario(const ScenarioConfig& cfg, std::int64_t target_moves);

}  // namespace qca
