#pragma once

#include <memory>
#include <string>
#include <utility>

#include "offload/model.hpp"
#include "offload/rng.hpp"

namespace offload {

/// A decision procedure with a stable display name. decide() is allowed to
/// mutate internal state (the random baseline owns its generator), so one
/// policy instance is not safe to share across threads; distinct instances are.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Decision decide(const Requirement& req) = 0;
    [[nodiscard]] virtual const std::string& name() const = 0;
};

/// Largest subtask count accepted by the exhaustive search (3^12 = 531441
/// candidates; beyond that the enumeration is no longer a sane oracle).
inline constexpr std::size_t kMaxExhaustiveSubtasks = 12;

/// Globally optimal decision by full enumeration of all 3^n placements,
/// together with its latency. Ties resolve to the lexicographically smallest
/// decision (Device < Edge < Cloud), which makes the result unique.
/// Throws std::invalid_argument when subtask_count exceeds the guard.
std::pair<Decision, double> solve_exhaustive(const Requirement& req);

/// Myopic baseline: fixes placements left to right, each subtask minimizing
/// its own incoming transfer plus compute cost; the last subtask also pays
/// the (then fully determined) return transfer to the device. Ties resolve
/// Device < Edge < Cloud.
Decision solve_greedy(const Requirement& req);

std::unique_ptr<Policy> make_exhaustive_policy(std::string name = "Optimal");
std::unique_ptr<Policy> make_greedy_policy(std::string name = "Greedy");

/// Constant policy placing every subtask at `loc`. The default display name
/// is to_string(loc); pass one explicitly for conventions like "Local".
std::unique_ptr<Policy> fixed_policy(Location loc, std::string name = "");

/// Each subtask placed independently and uniformly at random; deterministic
/// under the seed and call sequence.
std::unique_ptr<Policy> random_policy(std::uint64_t seed, std::string name = "Random");

}  // namespace offload
