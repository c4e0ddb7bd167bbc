#include "qca/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qca {

void ScenarioConfig::validate() const {
    topology.validate();
    traffic.validate();
    qkd.validate();
    strategy.validate();
    if (n_requests < 1) throw std::invalid_argument("scenario: n_requests must be >= 1");
    if (n_repetitions < 1) throw std::invalid_argument("scenario: n_repetitions must be >= 1");
    if (strategy.qch_count >= topology.channels_per_fiber)
        throw std::invalid_argument("scenario: qch_count must leave room for data channels");
    if (strategy.kind == StrategyKind::MlNsca && model_file.empty())
        throw std::invalid_argument("scenario: ml strategy needs a model file");
}

ScenarioConfig ScenarioConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    nlohmann::json j;
    in >> j;

    // paths in the config resolve relative to the config file
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&base](const std::string& p) {
        if (p.empty()) return p;
        std::filesystem::path fp(p);
        return fp.is_absolute() ? p : (base / fp).string();
    };

    ScenarioConfig cfg;
    cfg.topology_file = resolve(j.at("topology").get<std::string>());
    cfg.topology = TopologySpec::load_file(cfg.topology_file);
    if (j.contains("qkd_params")) {
        cfg.qkd_file = resolve(j.at("qkd_params").get<std::string>());
        cfg.qkd = QkdParams::load_file(cfg.qkd_file);
    }
    if (j.contains("traffic")) {
        const auto& t = j.at("traffic");
        if (t.contains("load_erlang")) cfg.traffic.load_erlang = t.at("load_erlang").get<double>();
        if (t.contains("mean_holding_slots"))
            cfg.traffic.mean_holding_slots = t.at("mean_holding_slots").get<double>();
        if (t.contains("power_min_dbm"))
            cfg.traffic.power_min_dbm = t.at("power_min_dbm").get<double>();
        if (t.contains("power_max_dbm"))
            cfg.traffic.power_max_dbm = t.at("power_max_dbm").get<double>();
    }
    if (j.contains("strategy")) {
        const auto& s = j.at("strategy");
        if (s.contains("kind")) cfg.strategy.kind = parse_strategy(s.at("kind").get<std::string>());
        if (s.contains("ts")) cfg.strategy.ts = s.at("ts").get<int>();
        if (s.contains("threshold_bps"))
            cfg.strategy.threshold_bps = s.at("threshold_bps").get<double>();
        if (s.contains("subset"))
            cfg.strategy.subset = parse_feature_subset(s.at("subset").get<std::string>());
        if (s.contains("qch_count")) cfg.strategy.qch_count = s.at("qch_count").get<int>();
        if (s.contains("model")) cfg.model_file = resolve(s.at("model").get<std::string>());
    }
    if (j.contains("n_requests")) cfg.n_requests = j.at("n_requests").get<std::int64_t>();
    if (j.contains("n_repetitions")) cfg.n_repetitions = j.at("n_repetitions").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

}  // namespace qca
