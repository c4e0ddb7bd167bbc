#include "qca/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "qca/rng.hpp"
#include "qca/text.hpp"

namespace qca {

namespace {

struct RepetitionResult {
    double mean_skr_bps = 0.0;
    std::vector<double> per_link_mean;
    std::int64_t offered = 0, blocked = 0, slots = 0;
    ReallocStats stats;
};

RepetitionResult run_repetition(const ScenarioConfig& cfg, const GbdtModel* model,
                                std::uint64_t rep_seed, std::vector<double>* trace) {
    Network net = Network::build(cfg.topology);
    initial_qch_placement(net, cfg.strategy.qch_count);
    TrafficStream stream(cfg.traffic, net.node_count(), rep_seed);

    std::vector<int> mux_links;
    for (const Link& l : net.links())
        if (l.is_mux()) mux_links.push_back(l.id);
    if (mux_links.empty()) throw std::invalid_argument("run: topology has no MUX link");

    if (cfg.strategy.kind == StrategyKind::MlNsca && model == nullptr)
        throw std::invalid_argument("run: ml strategy without a model");

    RepetitionResult rep;
    std::vector<double> skr_acc(mux_links.size(), 0.0);

    // With zero offered load the request-count termination never fires;
    // fall back to a fixed number of slots.
    const bool no_load = cfg.traffic.arrival_rate_per_slot() <= 0.0;
    std::int64_t slot = 0;
    while (no_load ? slot < cfg.n_requests : rep.offered < cfg.n_requests) {
        if (slot > 0) net.advance_timeslot();
        for (const Request& r : stream.slot(slot)) {
            ++rep.offered;
            if (!provision(net, r).accepted) ++rep.blocked;
        }

        switch (cfg.strategy.kind) {
            case StrategyKind::FixedBand:
                break;
            case StrategyKind::PerfPredict:
                for (int lid : mux_links) {
                    for (const PpStepResult& r :
                         pp_step(net, lid, cfg.strategy.threshold_bps, cfg.qkd)) {
                        ++rep.stats.events;
                        if (r.reallocated) ++rep.stats.moves;
                    }
                }
                break;
            case StrategyKind::MlNsca:
                if (slot % cfg.strategy.ts == 0)
                    ml_nsca_reallocate(net, *model, cfg.strategy.subset, cfg.strategy.ts,
                                       cfg.traffic.load_erlang, cfg.strategy.qch_count,
                                       rep.stats);
                break;
            case StrategyKind::Oracle:
                if (slot % cfg.strategy.ts == 0) {
                    std::vector<Request> window;
                    for (int s = 1; s <= cfg.strategy.ts; ++s)
                        for (Request r : stream.slot(slot + s)) {
                            r.arrival_slot = s;  // rebase to window-relative slots
                            window.push_back(r);
                        }
                    oracle_reallocate(net, window, cfg.strategy.ts, cfg.qkd,
                                      cfg.strategy.qch_count, rep.stats);
                }
                break;
        }

        double slot_skr = 0.0;
        for (std::size_t i = 0; i < mux_links.size(); ++i) {
            double link_skr = 0.0;
            for (int qch : net.link(mux_links[i]).quantum_channels)
                link_skr += evaluate_link_skr(net, mux_links[i], qch, cfg.qkd).rate_bps;
            skr_acc[i] += link_skr;
            slot_skr += link_skr;
        }
        if (trace) trace->push_back(slot_skr / double(mux_links.size()));
        ++slot;
    }

    rep.slots = slot;
    rep.per_link_mean.resize(mux_links.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mux_links.size(); ++i) {
        rep.per_link_mean[i] = skr_acc[i] / double(slot);
        acc += rep.per_link_mean[i];
    }
    rep.mean_skr_bps = acc / double(mux_links.size());
    return rep;
}

}  // namespace

RunMetrics run_experiment(const ScenarioConfig& cfg, const GbdtModel* model) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    RunMetrics out;
    for (int rep = 0; rep < cfg.n_repetitions; ++rep) {
        std::vector<double> trace;
        const bool want_trace = cfg.record_slot_trace && rep == 0;
        RepetitionResult r =
            run_repetition(cfg, model, derive_seed(cfg.seed, 0x726570, std::uint64_t(rep)),
                           want_trace ? &trace : nullptr);
        if (want_trace) out.slot_trace = std::move(trace);
        out.repetition_means.push_back(r.mean_skr_bps);
        if (out.per_link_mean_skr.empty()) out.per_link_mean_skr.resize(r.per_link_mean.size());
        for (std::size_t i = 0; i < r.per_link_mean.size(); ++i)
            out.per_link_mean_skr[i] += r.per_link_mean[i];
        out.offered_requests += r.offered;
        out.blocked_requests += r.blocked;
        out.total_slots += r.slots;
        out.realloc_events += r.stats.events;
        out.realloc_moves += r.stats.moves;
        out.suspensions += r.stats.suspensions;
    }
    for (double& v : out.per_link_mean_skr) v /= double(cfg.n_repetitions);

    double mean = 0.0;
    for (double v : out.repetition_means) mean += v;
    mean /= double(out.repetition_means.size());
    out.mean_skr_bps = mean;
    if (out.repetition_means.size() > 1) {
        double ss = 0.0;
        for (double v : out.repetition_means) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / double(out.repetition_means.size() - 1));
        out.ci95_bps = 1.96 * sd / std::sqrt(double(out.repetition_means.size()));
    }
    out.blocking_probability =
        out.offered_requests > 0 ? double(out.blocked_requests) / double(out.offered_requests)
                                 : 0.0;
    out.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const std::string& axis,
                                const std::vector<double>& values,
                                const std::vector<StrategyKind>& strategies,
                                const GbdtModel* model) {
    if (axis != "TL" && axis != "TS" && axis != "link_length" && axis != "qch_count")
        throw std::invalid_argument("sweep: unknown axis '" + axis + "'");
    std::vector<SweepRow> rows;
    for (double v : values) {
        ScenarioConfig cfg = base;
        if (axis == "TL") {
            cfg.traffic.load_erlang = v;
        } else if (axis == "TS") {
            cfg.strategy.ts = int(v);
        } else if (axis == "link_length") {
            for (Span& s : cfg.topology.spans) s.length_km = v;
        } else {
            cfg.strategy.qch_count = int(v);
        }
        for (StrategyKind k : strategies) {
            ScenarioConfig scfg = cfg;
            scfg.strategy.kind = k;  // same seed for every strategy: paired comparison
            SweepRow row;
            row.axis = axis;
            row.value = v;
            row.strategy = k;
            row.metrics = run_experiment(scfg, model);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {
constexpr const char* kSweepHeader =
    "axis,value,strategy,mean_skr_bps,ci95_bps,blocking_probability,"
    "realloc_events,realloc_moves,suspensions,n_repetitions,offered_requests";
constexpr const char* kMetricsHeader =
    "strategy,mean_skr_bps,ci95_bps,blocking_probability,realloc_events,"
    "realloc_moves,suspensions,n_repetitions,offered_requests,total_slots,seed";
}  // namespace

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << kSweepHeader << "\n";
    for (const SweepRow& r : rows) {
        out << r.axis << "," << fmt_double(r.value) << "," << strategy_name(r.strategy) << ","
            << fmt_double(r.metrics.mean_skr_bps) << "," << fmt_double(r.metrics.ci95_bps) << ","
            << fmt_double(r.metrics.blocking_probability) << ","
            << fmt_int(r.metrics.realloc_events) << "," << fmt_int(r.metrics.realloc_moves) << ","
            << fmt_int(r.metrics.suspensions) << ","
            << fmt_int(std::int64_t(r.metrics.repetition_means.size())) << ","
            << fmt_int(r.metrics.offered_requests) << "\n";
    }
}

void write_metrics_csv(const RunMetrics& m, const ScenarioConfig& cfg, std::ostream& out) {
    out << kMetricsHeader << "\n";
    out << strategy_name(cfg.strategy.kind) << "," << fmt_double(m.mean_skr_bps) << ","
        << fmt_double(m.ci95_bps) << "," << fmt_double(m.blocking_probability) << ","
        << fmt_int(m.realloc_events) << "," << fmt_int(m.realloc_moves) << ","
        << fmt_int(m.suspensions) << "," << fmt_int(std::int64_t(m.repetition_means.size()))
        << "," << fmt_int(m.offered_requests) << "," << fmt_int(m.total_slots) << ","
        << fmt_int(std::int64_t(cfg.seed)) << "\n";
}

EvalReport evaluate_model(const GbdtModel& model, const TrainingSet& test) {
    if (test.features.n_rows == 0) throw std::invalid_argument("evaluate: empty dataset");
    if (model.schema_fingerprint != test.schema.fingerprint())
        throw std::invalid_argument("evaluate: schema fingerprint mismatch");

    EvalReport rep;
    rep.n_rows = int(test.features.n_rows);

    double se = 0.0;
    std::vector<double> preds(test.features.n_rows);
    for (std::size_t r = 0; r < test.features.n_rows; ++r) {
        preds[r] = model.predict(test.features.row(r));
        const double d = preds[r] - test.targets[r];
        se += d * d;
    }
    rep.rmse = std::sqrt(se / double(test.features.n_rows));

    // per-event coincidence, grouped by label-gap
    std::size_t start = 0;
    int coincident_total = 0;
    std::array<int, 4> coincident_group{};
    while (start < test.features.n_rows) {
        std::size_t end = start;
        while (end < test.features.n_rows && test.event_ids[end] == test.event_ids[start]) ++end;

        std::size_t label_best = start, pred_best = start;
        double top1 = -1.0, top2 = -1.0;
        for (std::size_t r = start; r < end; ++r) {
            if (test.targets[r] > test.targets[label_best]) label_best = r;
            if (preds[r] > preds[pred_best]) pred_best = r;
        }
        for (std::size_t r = start; r < end; ++r) {
            if (test.targets[r] >= top1) {
                top2 = top1;
                top1 = test.targets[r];
            } else if (test.targets[r] > top2) {
                top2 = test.targets[r];
            }
        }
        if (top2 < 0) top2 = 0.0;  // single-candidate event
        const double gap = top1 - top2;
        int group;
        if (gap < 0.2)
            group = 0;
        else if (gap <= 0.4)
            group = 1;
        else if (gap <= 0.6)
            group = 2;
        else
            group = 3;

        ++rep.n_events;
        ++rep.group_events[std::size_t(group)];
        const bool coincident = label_best == pred_best;
        coincident_total += coincident;
        coincident_group[std::size_t(group)] += coincident;
        start = end;
    }
    rep.coincident_overall = double(coincident_total) / double(rep.n_events);
    for (int g = 0; g < 4; ++g) {
        rep.group_fraction[std::size_t(g)] =
            double(rep.group_events[std::size_t(g)]) / double(rep.n_events);
        rep.coincident_by_group[std::size_t(g)] =
            rep.group_events[std::size_t(g)] > 0
                ? double(coincident_group[std::size_t(g)]) /
                      double(rep.group_events[std::size_t(g)])
                : 0.0;
    }
    return rep;
}

void write_eval_csv(const EvalReport& r, std::ostream& out) {
    out << "metric,value\n";
    out << "rmse," << fmt_double(r.rmse) << "\n";
    out << "n_rows," << r.n_rows << "\n";
    out << "n_events," << r.n_events << "\n";
    out << "coincident_overall," << fmt_double(r.coincident_overall) << "\n";
    for (int g = 0; g < 4; ++g) {
        out << "group" << (g + 1) << "_events," << r.group_events[std::size_t(g)] << "\n";
        out << "group" << (g + 1) << "_fraction," << fmt_double(r.group_fraction[std::size_t(g)])
            << "\n";
        out << "group" << (g + 1) << "_coincident,"
            << fmt_double(r.coincident_by_group[std::size_t(g)]) << "\n";
    }
}

PpCalibration calibrate_pp_for_scenario(const ScenarioConfig& cfg, std::int64_t target_moves) {
    ScenarioConfig pp_cfg = cfg;
    pp_cfg.strategy.kind = StrategyKind::PerfPredict;
    auto count_at = [&pp_cfg](double theta) {
        ScenarioConfig c = pp_cfg;
        c.strategy.threshold_bps = theta;
        return run_experiment(c, nullptr).realloc_moves;
    };
    // above the maximum attainable rate every below-threshold slot reallocates
    const double theta_hi = pp_cfg.qkd.sifting_factor * pp_cfg.qkd.gate_rate_hz + 1.0;
    return calibrate_pp_threshold(count_at, target_moves, theta_hi);
}

}  // namespace qca
