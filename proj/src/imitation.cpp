#include "offload/imitation.hpp"

#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "offload/io.hpp"
#include "offload/serde.hpp"

namespace offload {

namespace {

constexpr const char* kArtifactSchema = "offload.artifact/1";

// Degenerate ranges (lo == hi) map to 0: the coordinate is constant under the
// spec, so it carries no information either way.
double norm(double v, const Range& r) { return r.hi > r.lo ? (v - r.lo) / (r.hi - r.lo) : 0.0; }

}  // namespace

Eigen::VectorXd FeatureCodec::encode(const Requirement& req) const {
    const std::size_t a = spec.num_subtasks;
    if (req.subtask_count() != a) {
        throw std::invalid_argument("requirement subtask count does not match the codec");
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(input_dim()));
    Eigen::Index k = 0;
    for (std::size_t t = 0; t < a; ++t) x(k++) = norm(req.task.cycles[t], spec.cycles);
    for (std::size_t t = 0; t <= a; ++t) x(k++) = norm(req.task.flow_bytes[t], spec.flow_bytes);
    x(k++) = norm(req.env.device_hz, spec.device_hz);
    x(k++) = norm(req.env.edge_hz, spec.edge_hz);
    x(k++) = norm(req.env.wireless_bps, spec.wireless_bps);
    x(k++) = norm(req.env.backhaul_bps, spec.backhaul_bps);
    return x;
}

Eigen::VectorXd one_hot_target(const Decision& label) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(label.size() * kLocationCount));
    for (std::size_t g = 0; g < label.size(); ++g) {
        t(static_cast<Eigen::Index>(g * kLocationCount + static_cast<std::size_t>(label.locs[g]))) = 1.0;
    }
    return t;
}

Decision decode(const Eigen::VectorXd& probs, std::size_t num_groups) {
    if (probs.size() != static_cast<Eigen::Index>(num_groups * kLocationCount)) {
        throw std::invalid_argument("probability vector length does not match the group count");
    }
    Decision dec;
    dec.locs.reserve(num_groups);
    for (std::size_t g = 0; g < num_groups; ++g) {
        const Eigen::Index base = static_cast<Eigen::Index>(g * kLocationCount);
        int arg = 0;
        for (int c = 1; c < static_cast<int>(kLocationCount); ++c) {
            if (probs(base + c) > probs(base + arg)) arg = c;  // strict >: ties keep the lower code
        }
        dec.locs.push_back(static_cast<Location>(arg));
    }
    return dec;
}

Decision predict(const MlpModel& model, const FeatureCodec& codec, const Requirement& req) {
    return decode(forward(model, codec.encode(req)), codec.spec.num_subtasks);
}

TeacherResult train_teacher(const Dataset& data, const Architecture& arch, const TrainConfig& cfg) {
    if (data.samples.empty()) throw std::invalid_argument("train_teacher: empty dataset");
    FeatureCodec codec{data.spec};
    if (arch.input_dim != codec.input_dim() || arch.num_groups != data.spec.num_subtasks ||
        arch.group_size != kLocationCount) {
        throw std::invalid_argument("architecture does not match the dataset's feature/label shape");
    }

    const auto n = static_cast<Eigen::Index>(data.samples.size());
    Eigen::MatrixXd features(static_cast<Eigen::Index>(codec.input_dim()), n);
    Eigen::MatrixXd targets(static_cast<Eigen::Index>(arch.output_dim()), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& sample = data.samples[static_cast<std::size_t>(i)];
        features.col(i) = codec.encode(sample.req);
        targets.col(i) = one_hot_target(sample.label);
    }

    TeacherResult out{.model = {}, .codec = codec, .trace = train(arch, features, targets, cfg)};
    out.model = out.trace.model;
    return out;
}

AccuracyReport accuracy(const MlpModel& model, const FeatureCodec& codec, const Dataset& data) {
    if (data.samples.empty()) throw std::invalid_argument("accuracy: empty dataset");
    const std::size_t groups = codec.spec.num_subtasks;
    const auto n = static_cast<Eigen::Index>(data.samples.size());
    Eigen::MatrixXd features(static_cast<Eigen::Index>(codec.input_dim()), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        features.col(i) = codec.encode(data.samples[static_cast<std::size_t>(i)].req);
    }
    const Eigen::MatrixXd probs = forward_batch(model, features);

    std::size_t label_hits = 0, exact_hits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Decision pred = decode(probs.col(i), groups);
        const Decision& truth = data.samples[static_cast<std::size_t>(i)].label;
        std::size_t hits = 0;
        for (std::size_t g = 0; g < groups; ++g) {
            hits += pred.locs[g] == truth.locs[g] ? 1 : 0;
        }
        label_hits += hits;
        exact_hits += hits == groups ? 1 : 0;
    }
    const double samples = static_cast<double>(n);
    return AccuracyReport{
        .per_label = static_cast<double>(label_hits) / (samples * static_cast<double>(groups)),
        .exact_match = static_cast<double>(exact_hits) / samples,
    };
}

namespace {

class ModelPolicy final : public Policy {
  public:
    ModelPolicy(MlpModel model, FeatureCodec codec, std::string name)
        : model_(std::move(model)), codec_(std::move(codec)), name_(std::move(name)) {
        model_.validate();
        if (model_.arch.input_dim != codec_.input_dim() || model_.arch.num_groups != codec_.spec.num_subtasks) {
            throw std::invalid_argument("model and codec shapes disagree");
        }
    }

    Decision decide(const Requirement& req) override { return predict(model_, codec_, req); }
    const std::string& name() const override { return name_; }

  private:
    MlpModel model_;
    FeatureCodec codec_;
    std::string name_;
};

}  // namespace

std::unique_ptr<Policy> make_model_policy(MlpModel model, FeatureCodec codec, std::string name) {
    return std::make_unique<ModelPolicy>(std::move(model), std::move(codec), std::move(name));
}

void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path) {
    if (artifact.model.arch.input_dim != artifact.codec.input_dim()) {
        throw std::invalid_argument("artifact model and codec shapes disagree");
    }
    nlohmann::json j{
        {"schema", kArtifactSchema},
        {"model", model_to_json(artifact.model)},
        {"codec", spec_to_json(artifact.codec.spec)},
    };
    write_file_atomic(path, j.dump() + "\n");
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    try {
        const auto j = nlohmann::json::parse(content);
        const auto schema = j.value("schema", std::string());
        if (schema != kArtifactSchema) {
            throw std::runtime_error("unsupported artifact schema \"" + schema + "\" (expected " +
                                     kArtifactSchema + ")");
        }
        if (!j.contains("model") || !j.contains("codec")) {
            throw std::runtime_error("artifact is missing \"model\" or \"codec\"");
        }
        ModelArtifact artifact{.model = model_from_json(j["model"]), .codec = {spec_from_json(j["codec"])}};
        if (artifact.model.arch.input_dim != artifact.codec.input_dim() ||
            artifact.model.arch.num_groups != artifact.codec.spec.num_subtasks) {
            throw std::runtime_error("artifact model and codec shapes disagree");
        }
        return artifact;
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace offload
