#pragma once

#include <json.hpp>

#include "offload/model.hpp"
#include "offload/workload.hpp"

namespace offload {

// JSON field layout shared by the dataset files and the model artifacts.
// Keys are part of the on-disk format; renaming them breaks old files.

nlohmann::json spec_to_json(const DistributionSpec& spec);
DistributionSpec spec_from_json(const nlohmann::json& j);

/// Writes the requirement's fields into `out` (eps_cycles, data_bytes,
/// p1_hz, p2_hz, b1_bps, b2_bps). Does not clear other keys.
void requirement_to_json(const Requirement& req, nlohmann::json& out);
Requirement requirement_from_json(const nlohmann::json& j);

}  // namespace offload
