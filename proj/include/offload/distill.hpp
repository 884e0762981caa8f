#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "offload/imitation.hpp"
#include "offload/mlp.hpp"
#include "offload/workload.hpp"

namespace offload {

/// Softening temperature; T = 1 leaves distributions unchanged, larger T
/// flattens them toward uniform.
struct Temperature {
    explicit Temperature(double t);  // throws std::invalid_argument if t < 1
    [[nodiscard]] double value() const { return t_; }

  private:
    double t_;
};

/// q_i = exp(ln(p_i)/T) / sum_j exp(ln(p_j)/T), i.e. p^(1/T) renormalized.
/// Entries are clamped up to 1e-12 before the logarithm, so exact zeros are
/// safe. The input must be a distribution: entries >= 0 summing to 1 within
/// 1e-6. Softening preserves the argmax for every T >= 1.
[[nodiscard]] Eigen::VectorXd soften(const Eigen::VectorXd& p, Temperature T);

/// A requirement with per-subtask probability triples instead of a hard label
/// (group-major flat layout, 3 entries per subtask).
struct SoftSample {
    Requirement req;
    std::vector<double> soft_label;
};

struct SoftDataset {
    DistributionSpec spec;  // distribution the requirements came from
    std::uint64_t seed = 0;
    std::vector<SoftSample> samples;
};

/// Runs the teacher on every requirement of `data` and softens each output
/// group at temperature T. The hard labels in `data` are ignored by design:
/// distillation trains on the teacher's belief, not the oracle's answer.
SoftDataset distill_labels(const MlpModel& teacher, const FeatureCodec& codec, const Dataset& data,
                           Temperature T);

/// Feature/target column matrices ready for train(). The codec is a
/// parameter because the student must encode with the teacher's codec
/// (the one the soft labels were produced under), not its own dataset's.
struct SoftBatch {
    Eigen::MatrixXd features;
    Eigen::MatrixXd targets;
};
SoftBatch soft_batch(const SoftDataset& ds, const FeatureCodec& codec);

/// mlp::train on soft targets; deterministic under cfg.seed.
TrainResult train_student(const SoftBatch& batch, const Architecture& arch, const TrainConfig& cfg);

/// Same JSON-lines layout as hard datasets, with "soft_label" (flat
/// group-major probabilities) in place of "label" and labels: "soft" in the
/// header.
void save_soft_dataset(const SoftDataset& ds, const std::filesystem::path& path);
SoftDataset load_soft_dataset(const std::filesystem::path& path);

}  // namespace offload
