#pragma once
// End-to-end experiment configuration, loaded from a JSON file with any
// field overridable from the command line.

#include <cstdint>
#include <string>

#include "qca/allocation.hpp"
#include "qca/qkd_physics.hpp"
#include "qca/topology.hpp"
#include "qca/traffic.hpp"

namespace qca {

struct ScenarioConfig {
    std::string topology_file;
    TopologySpec topology;
    TrafficParams traffic;
    QkdParams qkd;
    std::string qkd_file;   // optional override file
    StrategyConfig strategy;
    std::string model_file; // required for the ml strategy
    std::int64_t n_requests = 10000;
    int n_repetitions = 100;
    std::uint64_t seed = 1;
    bool record_slot_trace = false;

    void validate() const;
    static ScenarioConfig load_file(const std::string& path);
};

}  // namespace qca
