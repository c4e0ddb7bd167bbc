#include "qca/traffic.hpp"

#include <stdexcept>

namespace qca {

void TrafficParams::validate() const {
    if (load_erlang < 0) throw std::invalid_argument("traffic: load_erlang must be >= 0");
    if (mean_holding_slots < 1) throw std::invalid_argument("traffic: mean_holding_slots must be >= 1");
    if (power_max_dbm < power_min_dbm) throw std::invalid_argument("traffic: power range inverted");
}

TrafficGenerator::TrafficGenerator(const TrafficParams& params, int node_count, std::uint64_t seed)
    : params_(params), node_count_(node_count), rng_(seed) {
    params_.validate();
    if (node_count_ < 2) throw std::invalid_argument("traffic: need at least 2 nodes");
}

std::vector<Request> TrafficGenerator::arrivals_for_slot(std::int64_t slot) {
    if (slot != next_slot_)
        throw std::logic_error("TrafficGenerator: slots must be consumed in order");
    ++next_slot_;

    std::vector<Request> out;
    const int count = rng_.poisson(params_.arrival_rate_per_slot());
    out.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        Request r;
        r.arrival_slot = slot;
        r.src = rng_.uniform_int(0, node_count_ - 1);
        r.dst = rng_.uniform_int(0, node_count_ - 2);
        if (r.dst >= r.src) ++r.dst;  // uniform over ordered pairs
        r.holding_slots = rng_.geometric_from_mean(params_.mean_holding_slots);
        r.power_dbm = rng_.uniform(params_.power_min_dbm, params_.power_max_dbm);
        out.push_back(r);
    }
    return out;
}

const std::vector<Request>& TrafficStream::slot(std::int64_t s) {
    while (std::int64_t(slots_.size()) <= s)
        slots_.push_back(gen_.arrivals_for_slot(std::int64_t(slots_.size())));
    return slots_[std::size_t(s)];
}

ProvisionOutcome provision(Network& net, const Request& req) {
    ProvisionOutcome out;
    out.path = net.shortest_path(req.src, req.dst);
    for (int w = 1; w <= net.channels_per_fiber(); ++w) {
        bool free_everywhere = true;
        for (int lid : out.path) {
            if (net.link(lid).channel(w).use != ChannelUse::Free) {
                free_everywhere = false;
                break;
            }
        }
        if (free_everywhere) {
            out.accepted = true;
            out.wavelength = w;
            out.lightpath_id = net.provision_data(out.path, w, req.holding_slots, req.power_dbm);
            return out;
        }
    }
    return out;  // blocked
}

}  // namespace qca
