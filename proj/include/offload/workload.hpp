#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "offload/model.hpp"
#include "offload/rng.hpp"
#include "offload/solvers.hpp"

namespace offload {

struct Range {
    double lo;
    double hi;

    auto operator<=>(const Range&) const = default;
};

/// Draws below these floors are rejected and redrawn: a bandwidth or compute
/// rate of (almost) zero makes latency unbounded. Both floors are well under
/// 1% of the preset range widths.
inline constexpr double kMinBandwidthBps = 1e4;
inline constexpr double kMinComputeHz = 1e6;

/// Uniform ranges for every requirement parameter.
struct DistributionSpec {
    std::size_t num_subtasks;
    Range cycles;        // CPU cycles per subtask
    Range flow_bytes;    // data-flow size per stage boundary
    Range device_hz;
    Range edge_hz;
    Range wireless_bps;  // device<->edge
    Range backhaul_bps;  // edge<->cloud

    void validate() const;

    auto operator<=>(const DistributionSpec&) const = default;
};

/// Named presets: "cloud_scale" is the broad distribution (6 subtasks,
/// cycles up to 2e9, flows up to 10 MB); "edge_scale" narrows cycles to
/// [500e6, 1500e6] and flows to [3, 8] MB, everything else unchanged.
/// Throws std::invalid_argument for unknown names.
DistributionSpec preset(std::string_view name);

/// One i.i.d. requirement drawn from the spec's uniform ranges. Rates and
/// bandwidths are redrawn while below their positivity floors.
Requirement sample_requirement(const DistributionSpec& spec, Rng& rng);

struct LabeledSample {
    Requirement req;
    Decision label;
};

struct Dataset {
    DistributionSpec spec;
    std::uint64_t seed = 0;
    std::vector<LabeledSample> samples;
};

/// n labeled samples, deterministic under (spec, n, seed): sample i is drawn
/// from a substream derived from (seed, i), so the result does not depend on
/// how labeling is split across workers. With workers != 1 the labeler's
/// decide() must be stateless (the exhaustive, greedy and fixed policies are);
/// workers == 0 means one worker per hardware thread.
Dataset generate_dataset(const DistributionSpec& spec, std::size_t n, Policy& labeler, std::uint64_t seed,
                         std::size_t workers = 0);

/// JSON-lines persistence: a schema-versioned header record (spec + seed),
/// then one record per sample. Doubles round-trip exactly.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Throws std::runtime_error naming the file and line on malformed input,
/// label-length mismatches, schema mismatches, or an empty file.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace offload
