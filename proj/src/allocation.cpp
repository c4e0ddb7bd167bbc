#include "qca/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qca {

const char* strategy_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::FixedBand: return "fb";
        case StrategyKind::PerfPredict: return "pp";
        case StrategyKind::MlNsca: return "ml";
        case StrategyKind::Oracle: return "oracle";
    }
    return "?";
}

StrategyKind parse_strategy(const std::string& name) {
    if (name == "fb") return StrategyKind::FixedBand;
    if (name == "pp") return StrategyKind::PerfPredict;
    if (name == "ml") return StrategyKind::MlNsca;
    if (name == "oracle") return StrategyKind::Oracle;
    throw std::invalid_argument("unknown strategy: " + name);
}

void StrategyConfig::validate() const {
    if (ts < 1) throw std::invalid_argument("strategy: ts must be >= 1");
    if (threshold_bps < 0) throw std::invalid_argument("strategy: threshold must be >= 0");
    if (qch_count < 1) throw std::invalid_argument("strategy: qch_count must be >= 1");
}

void initial_qch_placement(Network& net, int qch_count) {
    if (qch_count < 1 || qch_count >= net.channels_per_fiber())
        throw std::invalid_argument("initial placement: qch_count out of range");
    for (const Link& l : net.links())
        if (l.is_mux())
            for (int ch = 1; ch <= qch_count; ++ch) net.place_quantum(l.id, ch);
}

std::vector<PpStepResult> pp_step(Network& net, int link, double threshold_bps,
                                  const QkdParams& qkd) {
    const Link& l = net.link(link);
    if (!l.is_mux()) throw std::invalid_argument("pp_step: not a MUX link");
    std::vector<PpStepResult> results;
    const std::vector<int> current = l.quantum_channels;
    for (int ch : current) {
        PpStepResult res;
        res.from_channel = ch;
        const double skr = evaluate_link_skr(net, link, ch, qkd).rate_bps;
        if (skr >= threshold_bps) {
            results.push_back(res);
            continue;
        }
        // below threshold: back up to the quietest free channel
        const auto avail = net.available_channels(link);
        if (avail.empty()) {
            results.push_back(res);
            continue;
        }
        int target = avail.front();
        double best_noise = -1.0;
        for (int cand : avail) {
            const double noise = link_noise(net, link, cand, qkd).total_w();
            if (best_noise < 0 || noise < best_noise) {  // ascending scan: ties keep lowest
                best_noise = noise;
                target = cand;
            }
        }
        net.release_quantum(link, ch);
        net.place_quantum(link, target);
        res.reallocated = true;
        res.to_channel = target;
        results.push_back(res);
    }
    return results;
}

namespace {

// Ranks candidates by score descending; equal scores keep the lower
// channel index (candidates arrive in ascending order, stable_sort keeps
// that order inside ties).
std::vector<int> rank_by_score(const std::vector<int>& candidates,
                               const std::vector<double>& scores) {
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<int> ranked(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) ranked[i] = candidates[order[i]];
    return ranked;
}

void apply_ranked_assignment(Network& net, int link, const std::vector<int>& ranked,
                             const std::vector<int>& previous, int qch_count,
                             ReallocStats& stats) {
    const int assign = std::min<int>(qch_count, int(ranked.size()));
    for (int i = 0; i < assign; ++i) {
        net.place_quantum(link, ranked[std::size_t(i)]);
        if (std::find(previous.begin(), previous.end(), ranked[std::size_t(i)]) ==
            previous.end())
            ++stats.moves;
    }
    stats.suspensions += qch_count - assign;
    ++stats.events;
}

}  // namespace

void ml_nsca_reallocate(Network& net, const GbdtModel& model, FeatureSubset subset, int ts,
                        double tl, int qch_count, ReallocStats& stats) {
    for (const Link& l : net.links()) {
        if (!l.is_mux()) continue;
        const std::vector<int> previous = net.release_all_quantum(l.id);
        const auto candidates = net.available_channels(l.id);
        if (candidates.empty()) {
            stats.suspensions += qch_count;
            ++stats.events;
            continue;
        }
        std::vector<double> scores(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto features = extract_features(net, l.id, subset, candidates[i], tl, ts);
            scores[i] = model.predict(features);
        }
        apply_ranked_assignment(net, l.id, rank_by_score(candidates, scores), previous,
                                qch_count, stats);
    }
}

std::vector<int> oracle_rank_channels(const Network& net, int link,
                                      const std::vector<Request>& future_window, int ts,
                                      const QkdParams& qkd) {
    const auto candidates = net.available_channels(link);
    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        scores[i] = window_mean_skr(net, link, candidates[i], future_window, ts, qkd);
    return rank_by_score(candidates, scores);
}

void oracle_reallocate(Network& net, const std::vector<Request>& future_window, int ts,
                       const QkdParams& qkd, int qch_count, ReallocStats& stats) {
    for (const Link& l : net.links()) {
        if (!l.is_mux()) continue;
        const std::vector<int> previous = net.release_all_quantum(l.id);
        const auto candidates = net.available_channels(l.id);
        if (candidates.empty()) {
            stats.suspensions += qch_count;
            ++stats.events;
            continue;
        }
        apply_ranked_assignment(net, l.id,
                                oracle_rank_channels(net, l.id, future_window, ts, qkd),
                                previous, qch_count, stats);
    }
}

PpCalibration calibrate_pp_threshold(const std::function<std::int64_t(double)>& count_at,
                                     std::int64_t target, double theta_hi,
                                     double tolerance_frac, int max_iterations) {
    if (theta_hi <= 0) throw std::invalid_argument("calibrate: theta_hi must be positive");
    PpCalibration cal;
    const std::int64_t tolerance =
        std::max<std::int64_t>(1, std::int64_t(tolerance_frac * double(target)));
    if (target <= 0) {
        cal.threshold_bps = 0.0;
        cal.achieved_moves = count_at(0.0);
        return cal;
    }
    std::int64_t high_count = count_at(theta_hi);
    ++cal.iterations;
    if (high_count < target - tolerance) {
        cal.threshold_bps = theta_hi;
        cal.achieved_moves = high_count;
        cal.saturated = true;
        return cal;
    }
    double lo = 0.0, hi = theta_hi;
    cal.threshold_bps = theta_hi;
    cal.achieved_moves = high_count;
    while (cal.iterations < max_iterations) {
        const double mid = 0.5 * (lo + hi);
        const std::int64_t c = count_at(mid);
        ++cal.iterations;
        if (std::llabs(c - target) <= std::llabs(cal.achieved_moves - target)) {
            cal.threshold_bps = mid;
            cal.achieved_moves = c;
        }
        if (std::llabs(c - target) <= tolerance) break;
        if (c < target)
            lo = mid;
        else
            hi = mid;
    }
    return cal;
}

}  // namespace qca
