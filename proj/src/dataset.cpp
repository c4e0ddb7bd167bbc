#include "qca/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qca/rng.hpp"
#include "qca/text.hpp"

namespace qca {

void McConfig::validate() const {
    if (n_sets < 1) throw std::invalid_argument("mc: n_sets must be >= 1");
    if (window_slots < 1) throw std::invalid_argument("mc: window_slots must be >= 1");
}

std::size_t LabelResult::argmax_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i)
        if (counts[i] > counts[best]) best = i;  // strict: ties keep the lowest channel
    return best;
}

std::vector<Request> draw_window_traffic(const TrafficParams& params, int node_count,
                                         int window_slots, std::uint64_t seed) {
    TrafficGenerator gen(params, node_count, seed);
    std::vector<Request> out;
    for (int s = 1; s <= window_slots; ++s) {
        // slot 0 of the generator's stream is discarded so that arrivals
        // begin the slot after the snapshot
        auto reqs = gen.arrivals_for_slot(s - 1);
        for (Request& r : reqs) {
            r.arrival_slot = s;
            out.push_back(r);
        }
    }
    return out;
}

double window_mean_skr(Network net, int link, int candidate,
                       const std::vector<Request>& window, int window_slots,
                       const QkdParams& qkd) {
    net.place_quantum(link, candidate);
    double acc = 0.0;
    std::size_t next_req = 0;
    for (int s = 1; s <= window_slots; ++s) {
        net.advance_timeslot();
        while (next_req < window.size() && window[next_req].arrival_slot == s) {
            provision(net, window[next_req]);
            ++next_req;
        }
        acc += evaluate_link_skr(net, link, candidate, qkd).rate_bps;
    }
    return acc / double(window_slots);
}

LabelResult monte_carlo_label(const Network& snapshot, int link, const McConfig& mc,
                              const TrafficParams& traffic, const QkdParams& qkd) {
    mc.validate();
    LabelResult label;
    label.candidates = snapshot.available_channels(link);
    if (label.candidates.empty())
        throw std::invalid_argument("monte_carlo_label: no available channel");
    label.counts.assign(label.candidates.size(), 0);
    label.n_sets = mc.n_sets;

    for (int draw = 0; draw < mc.n_sets; ++draw) {
        const auto window = draw_window_traffic(traffic, snapshot.node_count(), mc.window_slots,
                                                derive_seed(mc.seed, 0x6d63, std::uint64_t(draw)));
        std::size_t best = 0;
        double best_skr = -1.0;
        for (std::size_t i = 0; i < label.candidates.size(); ++i) {
            const double mean =
                window_mean_skr(snapshot, link, label.candidates[i], window, mc.window_slots, qkd);
            if (mean > best_skr) {  // strict: ties keep the lowest channel index
                best_skr = mean;
                best = i;
            }
        }
        ++label.counts[best];
    }
    return label;
}

void DatasetGenConfig::validate() const {
    topology.validate();
    qkd.validate();
    if (tl_values.empty()) throw std::invalid_argument("dataset: tl_values empty");
    for (double tl : tl_values)
        if (tl < 0) throw std::invalid_argument("dataset: negative TL");
    if (ts_values.empty()) throw std::invalid_argument("dataset: ts_values empty");
    for (int ts : ts_values)
        if (ts < 1) throw std::invalid_argument("dataset: TS must be >= 1");
    if (mean_holding_slots < 1) throw std::invalid_argument("dataset: mean holding must be >= 1");
    if (n_events < 1) throw std::invalid_argument("dataset: n_events must be >= 1");
    if (n_sets < 1) throw std::invalid_argument("dataset: n_sets must be >= 1");
    if (events_per_segment < 1) throw std::invalid_argument("dataset: events_per_segment must be >= 1");
    if (warmup_slots < 0) throw std::invalid_argument("dataset: warmup_slots must be >= 0");
}

TrainingSet generate_dataset(const DatasetGenConfig& cfg) {
    cfg.validate();
    const Network prototype = Network::build(cfg.topology);

    TrainingSet ds;
    ds.schema = FeatureSchema::make(cfg.subset, prototype.link_count(),
                                    prototype.channels_per_fiber());
    ds.features.n_cols = ds.schema.size();
    ds.n_sets = cfg.n_sets;

    int event_id = 0;
    int segment = 0;
    while (event_id < cfg.n_events) {
        const double tl = cfg.tl_values[std::size_t(segment) % cfg.tl_values.size()];
        const int ts = cfg.ts_values[(std::size_t(segment) / cfg.tl_values.size()) %
                                     cfg.ts_values.size()];
        TrafficParams traffic;
        traffic.load_erlang = tl;
        traffic.mean_holding_slots = cfg.mean_holding_slots;
        traffic.power_min_dbm = cfg.power_min_dbm;
        traffic.power_max_dbm = cfg.power_max_dbm;

        Network net = prototype;
        for (const Link& l : net.links())
            if (l.is_mux()) net.place_quantum(l.id, 1);
        TrafficGenerator gen(traffic, net.node_count(),
                             derive_seed(cfg.seed, 0x7472, std::uint64_t(segment)));

        int segment_events = 0;
        std::int64_t slot = 0;
        while (segment_events < cfg.events_per_segment && event_id < cfg.n_events) {
            if (slot > 0) net.advance_timeslot();
            for (const Request& r : gen.arrivals_for_slot(slot)) provision(net, r);
            if (slot >= cfg.warmup_slots && slot % ts == 0) {
                for (const Link& l : net.links()) {
                    if (!l.is_mux()) continue;
                    if (segment_events >= cfg.events_per_segment || event_id >= cfg.n_events) {
                        // keep the trajectory legal even when the quota is
                        // reached mid-slot: the remaining links just hold
                        // their current channel
                        continue;
                    }
                    net.release_all_quantum(l.id);
                    const auto avail = net.available_channels(l.id);
                    if (avail.empty()) continue;  // saturated link, no event

                    McConfig mc{cfg.n_sets, ts,
                                derive_seed(cfg.seed, 0x6c61, std::uint64_t(event_id))};
                    const LabelResult label = monte_carlo_label(net, l.id, mc, traffic, cfg.qkd);
                    for (std::size_t i = 0; i < label.candidates.size(); ++i) {
                        const auto row = extract_features(net, l.id, cfg.subset,
                                                          label.candidates[i], tl, ts);
                        ds.features.push_row(row);
                        ds.targets.push_back(label.p_opt(i));
                        ds.event_ids.push_back(event_id);
                    }
                    net.place_quantum(l.id, label.candidates[label.argmax_index()]);
                    ++event_id;
                    ++segment_events;
                }
            }
            ++slot;
        }
        ++segment;
    }
    ds.n_events = event_id;
    return ds;
}

void save_dataset_csv(const TrainingSet& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << "event_id";
    for (const std::string& n : ds.schema.names) out << "," << n;
    out << ",p_opt\n";
    for (std::size_t r = 0; r < ds.features.n_rows; ++r) {
        out << fmt_int(ds.event_ids[r]);
        for (double v : ds.features.row(r)) out << "," << fmt_double(v);
        out << "," << fmt_double(ds.targets[r]) << "\n";
    }

    nlohmann::json j;
    j["subset"] = feature_subset_name(ds.schema.subset);
    j["length"] = ds.schema.size();
    j["names"] = ds.schema.names;
    j["fingerprint"] = fmt_hex64(ds.schema.fingerprint());
    j["n_rows"] = ds.features.n_rows;
    j["n_events"] = ds.n_events;
    j["n_sets"] = ds.n_sets;
    std::ofstream side(path + ".schema.json", std::ios::binary);
    if (!side) throw std::runtime_error("cannot write schema descriptor for: " + path);
    side << j.dump(2) << "\n";
}

TrainingSet load_dataset_csv(const std::string& path) {
    std::ifstream side(path + ".schema.json");
    if (!side) throw std::runtime_error("missing schema descriptor: " + path + ".schema.json");
    nlohmann::json j;
    side >> j;

    TrainingSet ds;
    ds.schema.subset = parse_feature_subset(j.at("subset").get<std::string>());
    ds.schema.names = j.at("names").get<std::vector<std::string>>();
    ds.n_events = j.at("n_events").get<int>();
    ds.n_sets = j.at("n_sets").get<int>();
    if (j.at("fingerprint").get<std::string>() != fmt_hex64(ds.schema.fingerprint()))
        throw std::runtime_error("schema descriptor fingerprint mismatch: " + path);
    ds.features.n_cols = ds.schema.size();

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    {
        std::string expect = "event_id";
        for (const std::string& n : ds.schema.names) expect += "," + n;
        expect += ",p_opt";
        if (line != expect) throw std::runtime_error("dataset header mismatch: " + path);
    }
    std::vector<double> row(ds.schema.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != ds.schema.size() + 2)
            throw std::runtime_error("dataset row width mismatch: " + path);
        ds.event_ids.push_back(int(parse_int(cells.front())));
        for (std::size_t c = 0; c < ds.schema.size(); ++c) row[c] = parse_double(cells[c + 1]);
        ds.features.push_row(row);
        ds.targets.push_back(parse_double(cells.back()));
    }
    return ds;
}

std::pair<TrainingSet, TrainingSet> split_by_event(const TrainingSet& ds, double test_fraction,
                                                   std::uint64_t seed) {
    if (test_fraction < 0 || test_fraction > 1)
        throw std::invalid_argument("split_by_event: fraction outside [0,1]");
    TrainingSet train, test;
    train.schema = test.schema = ds.schema;
    train.n_sets = test.n_sets = ds.n_sets;
    train.features.n_cols = test.features.n_cols = ds.features.n_cols;
    const std::uint64_t threshold = std::uint64_t(test_fraction * double(UINT64_MAX));
    for (std::size_t r = 0; r < ds.features.n_rows; ++r) {
        const int e = ds.event_ids[r];
        const bool in_test = derive_seed(seed, 0x73706c, std::uint64_t(e)) <= threshold;
        TrainingSet& dst = in_test ? test : train;
        dst.features.push_row(ds.features.row(r));
        dst.targets.push_back(ds.targets[r]);
        dst.event_ids.push_back(e);
    }
    auto count_events = [](const TrainingSet& t) {
        int n = 0;
        int last = -1;
        for (int e : t.event_ids)
            if (e != last) {
                ++n;
                last = e;
            }
        return n;
    };
    train.n_events = count_events(train);
    test.n_events = count_events(test);
    return {train, test};
}

}  // namespace qca
