#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <string>

#include "offload/mlp.hpp"
#include "offload/model.hpp"
#include "offload/solvers.hpp"
#include "offload/workload.hpp"

namespace offload {

/// Min-max feature normalization against a DistributionSpec's ranges — fixed
/// by the generating distribution, not by any particular sample, so the codec
/// is identical across datasets drawn from the same spec.
struct FeatureCodec {
    DistributionSpec spec;

    /// Feature layout: [eps_0..eps_{A-1}, d_0..d_A, p1, p2, b1, b2] = 2|A| + 5.
    [[nodiscard]] std::size_t input_dim() const { return 2 * spec.num_subtasks + 5; }

    /// Values outside a range extrapolate linearly (no clamping: clamping
    /// would alias distinct requirements).
    [[nodiscard]] Eigen::VectorXd encode(const Requirement& req) const;

    bool operator==(const FeatureCodec&) const = default;
};

/// Per-subtask one-hot targets for a hard decision, flattened group-major.
[[nodiscard]] Eigen::VectorXd one_hot_target(const Decision& label);

/// Per-group argmax; ties break toward the lowest code (Device < Edge < Cloud).
[[nodiscard]] Decision decode(const Eigen::VectorXd& probs, std::size_t num_groups);

/// decode(forward(model, encode(codec, req))).
[[nodiscard]] Decision predict(const MlpModel& model, const FeatureCodec& codec, const Requirement& req);

struct TeacherResult {
    MlpModel model;
    FeatureCodec codec;
    TrainResult trace;  // trace.model duplicates `model`; kept for loss curves
};

/// Imitation training on hard optimal labels: codec from the dataset's spec,
/// one-hot targets, then mlp::train.
TeacherResult train_teacher(const Dataset& data, const Architecture& arch, const TrainConfig& cfg);

struct AccuracyReport {
    double per_label = 0.0;   // fraction of subtasks placed as labeled
    double exact_match = 0.0; // fraction of samples with the whole vector right
};

AccuracyReport accuracy(const MlpModel& model, const FeatureCodec& codec, const Dataset& data);

/// Wraps a trained model as a Policy for the evaluation harness:
/// decide() = predict(model, codec, req).
[[nodiscard]] std::unique_ptr<Policy> make_model_policy(MlpModel model, FeatureCodec codec, std::string name);

/// Artifact = model + codec in one JSON document, so inference needs no
/// dataset files and train/serve normalization cannot diverge.
struct ModelArtifact {
    MlpModel model;
    FeatureCodec codec;
};

void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_artifact(const std::filesystem::path& path);

}  // namespace offload
