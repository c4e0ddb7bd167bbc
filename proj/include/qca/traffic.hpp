#pragma once
// Poisson classical-data traffic and first-fit provisioning under the
// wavelength-continuity constraint.

#include <cstdint>
#include <optional>
#include <vector>

#include "qca/rng.hpp"
#include "qca/topology.hpp"

namespace qca {

struct TrafficParams {
    double load_erlang = 10.0;        // TL = lambda / mu
    double mean_holding_slots = 10.0; // 1 / mu
    double power_min_dbm = -5.0;
    double power_max_dbm = 5.0;

    double arrival_rate_per_slot() const { return load_erlang / mean_holding_slots; }
    void validate() const;
};

struct Request {
    int src = 0, dst = 0;
    std::int64_t arrival_slot = 0;
    int holding_slots = 1;
    double power_dbm = 0.0;
};

// Per-slot Poisson arrivals; holding times geometric (discrete analog of
// exponential) so that load_erlang = lambda/mu holds in slot units. Slots
// must be consumed in order: one underlying stream per generator.
class TrafficGenerator {
public:
    TrafficGenerator(const TrafficParams& params, int node_count, std::uint64_t seed);
    std::vector<Request> arrivals_for_slot(std::int64_t slot);
    std::int64_t next_slot() const { return next_slot_; }

private:
    TrafficParams params_;
    int node_count_;
    Rng rng_;
    std::int64_t next_slot_ = 0;
};

// Lazily materialized arrival sequence with lookahead, so that a
// clairvoyant consumer can peek at future slots while every strategy still
// observes the identical stream.
class TrafficStream {
public:
    TrafficStream(const TrafficParams& params, int node_count, std::uint64_t seed)
        : gen_(params, node_count, seed) {}
    const std::vector<Request>& slot(std::int64_t s);

private:
    TrafficGenerator gen_;
    std::vector<std::vector<Request>> slots_;
};

struct ProvisionOutcome {
    bool accepted = false;
    std::uint64_t lightpath_id = 0;
    int wavelength = 0;
    std::vector<int> path;
};

// Shortest-path routing + first-fit wavelength assignment. On failure
// returns accepted=false and leaves the network untouched; a blocked
// request is a value, not an error.
ProvisionOutcome provision(Network& net, const Request& req);

}  // namespace qca
