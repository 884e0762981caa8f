#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace offload {

/// Placement of one subtask. Integer codes are part of the on-disk contract.
enum class Location : std::uint8_t { Device = 0, Edge = 1, Cloud = 2 };

/// Number of placement choices per subtask (also the class count of the
/// grouped-softmax output head).
inline constexpr std::size_t kLocationCount = 3;

const char* to_string(Location loc);
Location location_from_code(int code);

/// A linearly ordered compute task: per-subtask CPU cycle counts and the
/// data-flow sizes between stages. flow_bytes[t] is the input of subtask t;
/// flow_bytes[n] is the task's final output.
struct TaskProfile {
    std::vector<double> cycles;      // CPU cycles per subtask, one entry per subtask
    std::vector<double> flow_bytes;  // cycles.size() + 1 entries

    [[nodiscard]] std::size_t subtask_count() const { return cycles.size(); }

    /// Throws std::invalid_argument unless cycles is nonempty,
    /// flow_bytes has exactly one more entry, and all values are finite and >= 0.
    void validate() const;
};

/// Compute rates and link bandwidths seen by one offloading requirement.
/// The edge server relays all device<->cloud traffic, so a device<->cloud
/// transfer pays for both links.
struct Environment {
    double device_hz;      // end-device compute rate (cycles/s)
    double edge_hz;        // edge-server compute rate (cycles/s)
    double wireless_bps;   // device<->edge bandwidth (bytes/s)
    double backhaul_bps;   // edge<->cloud bandwidth (bytes/s)

    /// Throws std::invalid_argument unless all four rates are finite and > 0.
    void validate() const;
};

/// One offloading requirement: the task to place plus the current environment.
struct Requirement {
    TaskProfile task;
    Environment env;

    [[nodiscard]] std::size_t subtask_count() const { return task.subtask_count(); }
    void validate() const;
};

/// A placement vector, one Location per subtask. Ordering is lexicographic
/// with Device < Edge < Cloud, which is the tie-break order used everywhere.
struct Decision {
    std::vector<Location> locs;

    [[nodiscard]] std::size_t size() const { return locs.size(); }

    static Decision filled(std::size_t n, Location loc) { return Decision{std::vector<Location>(n, loc)}; }

    auto operator<=>(const Decision&) const = default;
};

std::string to_string(const Decision& dec);

/// Seconds to move `bytes` from one location to another. Same location costs
/// nothing; device<->cloud traverses the wireless link and the backhaul.
/// Symmetric in from/to.
double link_seconds(Location from, Location to, double bytes, const Environment& env);

/// Computation latency summed over subtasks: cycles/device_hz on the device,
/// cycles/edge_hz on the edge, zero on the cloud.
/// Throws std::invalid_argument if the decision length does not match.
double exec_latency(const Requirement& req, const Decision& dec);

/// Transmission latency summed over every data flow, including the initial
/// upload of the task input and the return of the final output; the task
/// enters and leaves at the device.
double trans_latency(const Requirement& req, const Decision& dec);

/// End-to-end latency: exec_latency + trans_latency, exactly.
double total_latency(const Requirement& req, const Decision& dec);

}  // namespace offload
