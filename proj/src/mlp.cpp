#include "offload/mlp.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "offload/io.hpp"
#include "offload/rng.hpp"

namespace offload {

namespace {

constexpr const char* kModelSchema = "offload.mlp/1";
constexpr double kProbFloor = 1e-12;

std::vector<std::size_t> layer_dims(const Architecture& arch) {
    std::vector<std::size_t> dims;
    dims.reserve(arch.hidden.size() + 2);
    dims.push_back(arch.input_dim);
    dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
    dims.push_back(arch.output_dim());
    return dims;
}

void grouped_softmax_inplace(Eigen::MatrixXd& logits, const Architecture& arch) {
    for (Eigen::Index col = 0; col < logits.cols(); ++col) {
        for (std::size_t g = 0; g < arch.num_groups; ++g) {
            auto seg = logits.col(col).segment(static_cast<Eigen::Index>(g * arch.group_size),
                                               static_cast<Eigen::Index>(arch.group_size));
            seg.array() -= seg.maxCoeff();  // stability shift; softmax is shift-invariant
            seg = seg.array().exp();
            seg /= seg.sum();
        }
    }
}

/// Post-activation value of every layer: [0] is the input, back() is the
/// grouped-softmax output. Columns are samples.
std::vector<Eigen::MatrixXd> forward_states(const MlpModel& model, const Eigen::MatrixXd& X) {
    const std::size_t layers = model.weights.size();
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(layers + 1);
    acts.push_back(X);
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = (model.weights[l] * acts.back()).colwise() + model.biases[l];
        if (l + 1 < layers) {
            z = z.cwiseMax(0.0);  // ReLU
        } else {
            grouped_softmax_inplace(z, model.arch);
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

double ce_from_probs(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& targets) {
    return -(targets.array() * probs.array().max(kProbFloor).log()).sum() /
           static_cast<double>(probs.cols());
}

void check_batch(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T) {
    if (X.rows() != static_cast<Eigen::Index>(model.arch.input_dim)) {
        throw std::invalid_argument("feature dimension does not match the architecture");
    }
    if (T.rows() != static_cast<Eigen::Index>(model.arch.output_dim())) {
        throw std::invalid_argument("target dimension does not match the architecture");
    }
    if (X.cols() != T.cols()) throw std::invalid_argument("feature/target sample counts differ");
    if (X.cols() == 0) throw std::invalid_argument("empty batch");
}

struct LossAndGrad {
    double loss;
    Gradients grads;
};

LossAndGrad loss_and_grad(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T) {
    const auto acts = forward_states(model, X);
    const std::size_t layers = model.weights.size();
    const double n = static_cast<double>(X.cols());

    LossAndGrad out;
    out.loss = ce_from_probs(acts.back(), T);
    out.grads.weights.resize(layers);
    out.grads.biases.resize(layers);

    // Per-group softmax + cross-entropy gives d(loss)/d(logits) = probs - targets.
    Eigen::MatrixXd delta = (acts.back() - T) / n;
    for (std::size_t l = layers; l-- > 0;) {
        out.grads.weights[l].noalias() = delta * acts[l].transpose();
        out.grads.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd mask = (acts[l].array() > 0.0).cast<double>();
            delta = (model.weights[l].transpose() * delta).cwiseProduct(mask);
        }
    }
    return out;
}

}  // namespace

void Architecture::validate() const {
    if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    if (num_groups < 1) throw std::invalid_argument("num_groups must be >= 1");
    if (group_size < 1) throw std::invalid_argument("group_size must be >= 1");
    for (std::size_t w : hidden) {
        if (w < 1) throw std::invalid_argument("hidden layer widths must be >= 1");
    }
}

std::size_t param_count(const Architecture& arch) {
    arch.validate();
    const auto dims = layer_dims(arch);
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        count += dims[l] * dims[l + 1] + dims[l + 1];
    }
    return count;
}

void MlpModel::validate() const {
    arch.validate();
    const auto dims = layer_dims(arch);
    if (weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1) {
        throw std::invalid_argument("layer count does not match the architecture");
    }
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        if (weights[l].rows() != static_cast<Eigen::Index>(dims[l + 1]) ||
            weights[l].cols() != static_cast<Eigen::Index>(dims[l])) {
            throw std::invalid_argument("weight matrix shape mismatch at layer " + std::to_string(l));
        }
        if (biases[l].size() != static_cast<Eigen::Index>(dims[l + 1])) {
            throw std::invalid_argument("bias vector shape mismatch at layer " + std::to_string(l));
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw std::invalid_argument("non-finite parameters at layer " + std::to_string(l));
        }
    }
}

MlpModel zero_model(const Architecture& arch) {
    arch.validate();
    const auto dims = layer_dims(arch);
    MlpModel model;
    model.arch = arch;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        model.weights.emplace_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dims[l + 1]),
                                                         static_cast<Eigen::Index>(dims[l])));
        model.biases.emplace_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims[l + 1])));
    }
    return model;
}

MlpModel init_model(const Architecture& arch, std::uint64_t seed) {
    MlpModel model = zero_model(arch);
    Rng rng(seed);
    for (auto& w : model.weights) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            w.data()[i] = rng.uniform(-limit, limit);
        }
    }
    return model;
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& features) {
    if (features.size() != static_cast<Eigen::Index>(model.arch.input_dim)) {
        throw std::invalid_argument("feature dimension does not match the architecture");
    }
    return forward_batch(model, features);
}

Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& features) {
    if (features.rows() != static_cast<Eigen::Index>(model.arch.input_dim)) {
        throw std::invalid_argument("feature dimension does not match the architecture");
    }
    Eigen::MatrixXd a = features;
    const std::size_t layers = model.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = (model.weights[l] * a).colwise() + model.biases[l];
        if (l + 1 < layers) {
            a = z.cwiseMax(0.0);
        } else {
            grouped_softmax_inplace(z, model.arch);
            a = std::move(z);
        }
    }
    return a;
}

double loss(const MlpModel& model, const Eigen::VectorXd& features, const Eigen::VectorXd& target) {
    return batch_loss(model, features, target);
}

double batch_loss(const MlpModel& model, const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets) {
    check_batch(model, features, targets);
    return ce_from_probs(forward_batch(model, features), targets);
}

Gradients grad(const MlpModel& model, const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets) {
    check_batch(model, features, targets);
    return loss_and_grad(model, features, targets).grads;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
        throw std::invalid_argument("val_fraction must lie in [0, 1)");
    }
}

TrainResult train(const Architecture& arch, const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                  const TrainConfig& cfg) {
    arch.validate();
    cfg.validate();

    TrainResult res;
    res.model = init_model(arch, derive_seed(cfg.seed, 0));
    check_batch(res.model, features, targets);
    if (cfg.epochs == 0) return res;

    const std::size_t n = static_cast<std::size_t>(features.cols());
    Rng rng(derive_seed(cfg.seed, 1));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);

    const auto n_val = static_cast<std::size_t>(static_cast<double>(n) * cfg.val_fraction);
    const std::size_t n_train = n - n_val;
    std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));

    Eigen::MatrixXd val_x(features.rows(), static_cast<Eigen::Index>(n_val));
    Eigen::MatrixXd val_t(targets.rows(), static_cast<Eigen::Index>(n_val));
    for (std::size_t i = 0; i < n_val; ++i) {
        val_x.col(static_cast<Eigen::Index>(i)) = features.col(static_cast<Eigen::Index>(perm[n_train + i]));
        val_t.col(static_cast<Eigen::Index>(i)) = targets.col(static_cast<Eigen::Index>(perm[n_train + i]));
    }

    // Adam moment estimates (unused by plain SGD).
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    for (std::size_t l = 0; l < res.model.weights.size(); ++l) {
        mw.push_back(Eigen::MatrixXd::Zero(res.model.weights[l].rows(), res.model.weights[l].cols()));
        vw.push_back(mw.back());
        mb.push_back(Eigen::VectorXd::Zero(res.model.biases[l].size()));
        vb.push_back(mb.back());
    }
    std::size_t step = 0;

    MlpModel best = res.model;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t bad_epochs = 0;

    Eigen::MatrixXd batch_x, batch_t;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(train_idx);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t b = std::min(cfg.batch_size, n_train - start);
            batch_x.resize(features.rows(), static_cast<Eigen::Index>(b));
            batch_t.resize(targets.rows(), static_cast<Eigen::Index>(b));
            for (std::size_t i = 0; i < b; ++i) {
                batch_x.col(static_cast<Eigen::Index>(i)) =
                    features.col(static_cast<Eigen::Index>(train_idx[start + i]));
                batch_t.col(static_cast<Eigen::Index>(i)) =
                    targets.col(static_cast<Eigen::Index>(train_idx[start + i]));
            }
            auto lg = loss_and_grad(res.model, batch_x, batch_t);
            loss_sum += lg.loss;
            ++batches;

            if (cfg.optimizer == Optimizer::Sgd) {
                for (std::size_t l = 0; l < res.model.weights.size(); ++l) {
                    res.model.weights[l] -= cfg.learning_rate * lg.grads.weights[l];
                    res.model.biases[l] -= cfg.learning_rate * lg.grads.biases[l];
                }
            } else {
                ++step;
                const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
                const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
                for (std::size_t l = 0; l < res.model.weights.size(); ++l) {
                    mw[l] = beta1 * mw[l] + (1.0 - beta1) * lg.grads.weights[l];
                    vw[l] = beta2 * vw[l] + (1.0 - beta2) * lg.grads.weights[l].cwiseAbs2();
                    res.model.weights[l].array() -= cfg.learning_rate * (mw[l].array() / corr1) /
                                                    ((vw[l].array() / corr2).sqrt() + adam_eps);
                    mb[l] = beta1 * mb[l] + (1.0 - beta1) * lg.grads.biases[l];
                    vb[l] = beta2 * vb[l] + (1.0 - beta2) * lg.grads.biases[l].cwiseAbs2();
                    res.model.biases[l].array() -= cfg.learning_rate * (mb[l].array() / corr1) /
                                                   ((vb[l].array() / corr2).sqrt() + adam_eps);
                }
            }
        }
        res.train_loss.push_back(loss_sum / static_cast<double>(batches));

        if (n_val > 0) {
            const double vl = batch_loss(res.model, val_x, val_t);
            res.val_loss.push_back(vl);
            if (vl < best_val) {
                best_val = vl;
                best = res.model;
                res.best_epoch = res.val_loss.size() - 1;
                bad_epochs = 0;
            } else {
                ++bad_epochs;
            }
            if (cfg.patience > 0 && bad_epochs >= cfg.patience) break;
        }
    }

    if (n_val > 0) {
        res.model = std::move(best);
    } else {
        res.best_epoch = res.train_loss.empty() ? 0 : res.train_loss.size() - 1;
    }
    return res;
}

nlohmann::json model_to_json(const MlpModel& model) {
    model.validate();
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(w.size()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        }
        std::vector<double> bias(model.biases[l].data(), model.biases[l].data() + model.biases[l].size());
        layers.push_back({{"weights", flat}, {"bias", bias}});
    }
    return nlohmann::json{
        {"schema", kModelSchema},
        {"arch",
         {{"input_dim", model.arch.input_dim},
          {"hidden", model.arch.hidden},
          {"num_groups", model.arch.num_groups},
          {"group_size", model.arch.group_size}}},
        {"layers", layers},
    };
}

MlpModel model_from_json(const nlohmann::json& j) {
    const auto schema = j.value("schema", std::string());
    if (schema != kModelSchema) {
        throw std::runtime_error("unsupported model schema \"" + schema + "\" (expected " + kModelSchema + ")");
    }
    if (!j.contains("arch")) throw std::runtime_error("model is missing \"arch\"");
    const auto& a = j["arch"];
    Architecture arch;
    arch.input_dim = a.value("input_dim", std::size_t{0});
    arch.hidden = a.value("hidden", std::vector<std::size_t>{});
    arch.num_groups = a.value("num_groups", std::size_t{0});
    arch.group_size = a.value("group_size", std::size_t{0});

    MlpModel model = zero_model(arch);
    if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].size() != model.weights.size()) {
        throw std::runtime_error("model layer list does not match the architecture");
    }
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& layer = j["layers"][l];
        auto& w = model.weights[l];
        const auto flat = layer.value("weights", std::vector<double>{});
        if (flat.size() != static_cast<std::size_t>(w.size())) {
            throw std::runtime_error("weight count mismatch at layer " + std::to_string(l));
        }
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
        }
        const auto bias = layer.value("bias", std::vector<double>{});
        if (bias.size() != static_cast<std::size_t>(model.biases[l].size())) {
            throw std::runtime_error("bias count mismatch at layer " + std::to_string(l));
        }
        for (std::size_t i = 0; i < bias.size(); ++i) {
            model.biases[l](static_cast<Eigen::Index>(i)) = bias[i];
        }
    }
    model.validate();  // rejects non-finite parameters
    return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(model).dump() + "\n");
}

MlpModel load_model(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    try {
        return model_from_json(nlohmann::json::parse(content));
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace offload
