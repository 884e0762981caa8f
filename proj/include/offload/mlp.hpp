#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <vector>

namespace offload {

/// Feedforward net layout: input -> ReLU hidden layers -> linear output of
/// num_groups * group_size logits, softmax applied independently per group.
struct Architecture {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;
    std::size_t num_groups = 0;
    std::size_t group_size = 3;

    [[nodiscard]] std::size_t output_dim() const { return num_groups * group_size; }
    void validate() const;

    bool operator==(const Architecture&) const = default;
};

/// Total learnable parameters: sum over layers of fan_in * fan_out + fan_out.
[[nodiscard]] std::size_t param_count(const Architecture& arch);

/// Weights are (fan_out x fan_in); layer l maps activations a to
/// weights[l] * a + biases[l]. All parameters are 64-bit.
struct MlpModel {
    Architecture arch;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    void validate() const;  // shape chain + finiteness
};

MlpModel zero_model(const Architecture& arch);

/// Fan-in-scaled uniform init (He): weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
/// biases zero. Deterministic in the seed.
MlpModel init_model(const Architecture& arch, std::uint64_t seed);

/// Per-group probability vectors, flattened group-major to length output_dim.
/// Softmax is computed in max-shifted form, so arbitrary finite logits are safe.
[[nodiscard]] Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& features);

/// Batch variant; samples are columns (input_dim x n in, output_dim x n out).
[[nodiscard]] Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& features);

/// Sum over groups of cross-entropy -target . ln(predicted), with predicted
/// clamped below at 1e-12. Targets are per-group distributions (one-hot or soft).
[[nodiscard]] double loss(const MlpModel& model, const Eigen::VectorXd& features, const Eigen::VectorXd& target);

/// Mean loss over a batch (columns = samples).
[[nodiscard]] double batch_loss(const MlpModel& model, const Eigen::MatrixXd& features,
                                const Eigen::MatrixXd& targets);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Gradient of batch_loss with respect to every parameter (backpropagation).
[[nodiscard]] Gradients grad(const MlpModel& model, const Eigen::MatrixXd& features,
                             const Eigen::MatrixXd& targets);

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 128;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;
    double val_fraction = 0.1;   // held out for early stopping; 0 disables
    std::size_t patience = 10;   // epochs without val improvement before stopping; 0 = never stop early
    Optimizer optimizer = Optimizer::Adam;

    void validate() const;
};

struct TrainResult {
    MlpModel model;                 // best-validation parameters (final if no val split)
    std::vector<double> train_loss; // mean batch loss per completed epoch
    std::vector<double> val_loss;   // empty when val_fraction rounds to zero samples
    std::size_t best_epoch = 0;     // index into val_loss (or last epoch without val)
};

/// Seeded end to end: initialization, the validation split, and every epoch's
/// shuffle derive from cfg.seed, so identical inputs give bitwise-identical
/// models. epochs == 0 returns the initialization unchanged.
TrainResult train(const Architecture& arch, const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                  const TrainConfig& cfg);

/// Model files are a single JSON document (schema offload.mlp/1) with the
/// architecture and per-layer row-major parameter arrays at full precision.
nlohmann::json model_to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace offload
