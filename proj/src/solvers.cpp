#include "offload/solvers.hpp"

#include <array>
#include <limits>
#include <stdexcept>

namespace offload {

namespace {

constexpr std::array<Location, 3> kAllLocations = {Location::Device, Location::Edge, Location::Cloud};

// Advances locs through {Device,Edge,Cloud}^n in lexicographic order
// (last position fastest). Returns false once the sequence wraps.
bool next_candidate(std::vector<Location>& locs) {
    for (std::size_t i = locs.size(); i-- > 0;) {
        if (locs[i] != Location::Cloud) {
            locs[i] = static_cast<Location>(static_cast<int>(locs[i]) + 1);
            return true;
        }
        locs[i] = Location::Device;
    }
    return false;
}

}  // namespace

std::pair<Decision, double> solve_exhaustive(const Requirement& req) {
    const std::size_t n = req.subtask_count();
    if (n > kMaxExhaustiveSubtasks) {
        throw std::invalid_argument("instance too large for exhaustive search: " + std::to_string(n) +
                                    " subtasks (limit " + std::to_string(kMaxExhaustiveSubtasks) + ")");
    }
    Decision candidate = Decision::filled(n, Location::Device);
    Decision best = candidate;
    double best_latency = total_latency(req, candidate);
    // Strict improvement keeps the first (lexicographically smallest) optimum.
    while (next_candidate(candidate.locs)) {
        const double latency = total_latency(req, candidate);
        if (latency < best_latency) {
            best_latency = latency;
            best = candidate;
        }
    }
    return {best, best_latency};
}

Decision solve_greedy(const Requirement& req) {
    const std::size_t n = req.subtask_count();
    Decision dec;
    dec.locs.reserve(n);
    Location prev = Location::Device;
    for (std::size_t t = 0; t < n; ++t) {
        const bool last = t + 1 == n;
        Location pick = Location::Device;
        double pick_cost = std::numeric_limits<double>::infinity();
        for (Location cand : kAllLocations) {
            double cost = link_seconds(prev, cand, req.task.flow_bytes[t], req.env);
            switch (cand) {
                case Location::Device: cost += req.task.cycles[t] / req.env.device_hz; break;
                case Location::Edge: cost += req.task.cycles[t] / req.env.edge_hz; break;
                case Location::Cloud: break;
            }
            if (last) {
                cost += link_seconds(cand, Location::Device, req.task.flow_bytes[n], req.env);
            }
            if (cost < pick_cost) {  // strict: ties keep Device < Edge < Cloud order
                pick_cost = cost;
                pick = cand;
            }
        }
        dec.locs.push_back(pick);
        prev = pick;
    }
    return dec;
}

namespace {

class ExhaustivePolicy final : public Policy {
public:
    explicit ExhaustivePolicy(std::string name) : name_(std::move(name)) {}
    Decision decide(const Requirement& req) override { return solve_exhaustive(req).first; }
    const std::string& name() const override { return name_; }

private:
    std::string name_;
};

class GreedyPolicy final : public Policy {
public:
    explicit GreedyPolicy(std::string name) : name_(std::move(name)) {}
    Decision decide(const Requirement& req) override { return solve_greedy(req); }
    const std::string& name() const override { return name_; }

private:
    std::string name_;
};

class FixedPolicy final : public Policy {
public:
    FixedPolicy(Location loc, std::string name)
        : loc_(loc), name_(name.empty() ? to_string(loc) : std::move(name)) {}
    Decision decide(const Requirement& req) override { return Decision::filled(req.subtask_count(), loc_); }
    const std::string& name() const override { return name_; }

private:
    Location loc_;
    std::string name_;
};

class RandomPolicy final : public Policy {
public:
    RandomPolicy(std::uint64_t seed, std::string name) : rng_(seed), name_(std::move(name)) {}
    Decision decide(const Requirement& req) override {
        Decision dec;
        dec.locs.reserve(req.subtask_count());
        for (std::size_t t = 0; t < req.subtask_count(); ++t) {
            dec.locs.push_back(static_cast<Location>(rng_.below(kLocationCount)));
        }
        return dec;
    }
    const std::string& name() const override { return name_; }

private:
    Rng rng_;
    std::string name_;
};

}  // namespace

std::unique_ptr<Policy> make_exhaustive_policy(std::string name) {
    return std::make_unique<ExhaustivePolicy>(std::move(name));
}

std::unique_ptr<Policy> make_greedy_policy(std::string name) {
    return std::make_unique<GreedyPolicy>(std::move(name));
}

std::unique_ptr<Policy> fixed_policy(Location loc, std::string name) {
    return std::make_unique<FixedPolicy>(loc, std::move(name));
}

std::unique_ptr<Policy> random_policy(std::uint64_t seed, std::string name) {
    return std::make_unique<RandomPolicy>(seed, std::move(name));
}

}  // namespace offload
