#include "offload/distill.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "offload/io.hpp"
#include "offload/serde.hpp"

namespace offload {

namespace {

constexpr const char* kDatasetSchema = "offload.dataset/1";
constexpr double kProbFloor = 1e-12;
constexpr double kSumTolerance = 1e-6;

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << path.string() << ":" << line << ": " << what;
    throw std::runtime_error(msg.str());
}

}  // namespace

Temperature::Temperature(double t) : t_(t) {
    if (!(t >= 1.0)) throw std::invalid_argument("temperature must be >= 1");
}

Eigen::VectorXd soften(const Eigen::VectorXd& p, Temperature T) {
    if (p.size() == 0) throw std::invalid_argument("soften: empty distribution");
    if ((p.array() < 0.0).any()) throw std::invalid_argument("soften: negative probability");
    if (std::abs(p.sum() - 1.0) > kSumTolerance) {
        throw std::invalid_argument("soften: input does not sum to 1");
    }
    // ln then exp of ln/T, with a max shift for stability at large T or tiny p.
    Eigen::ArrayXd scaled_log = p.array().max(kProbFloor).log() / T.value();
    scaled_log -= scaled_log.maxCoeff();
    Eigen::VectorXd q = scaled_log.exp();
    q /= q.sum();
    return q;
}

SoftDataset distill_labels(const MlpModel& teacher, const FeatureCodec& codec, const Dataset& data,
                           Temperature T) {
    if (data.samples.empty()) throw std::invalid_argument("distill_labels: empty dataset");
    const std::size_t groups = codec.spec.num_subtasks;
    if (teacher.arch.input_dim != codec.input_dim() || teacher.arch.num_groups != groups) {
        throw std::invalid_argument("teacher and codec shapes disagree");
    }

    const auto n = static_cast<Eigen::Index>(data.samples.size());
    Eigen::MatrixXd features(static_cast<Eigen::Index>(codec.input_dim()), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        features.col(i) = codec.encode(data.samples[static_cast<std::size_t>(i)].req);
    }
    const Eigen::MatrixXd probs = forward_batch(teacher, features);

    SoftDataset out;
    out.spec = data.spec;
    out.seed = data.seed;
    out.samples.reserve(data.samples.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        SoftSample sample;
        sample.req = data.samples[static_cast<std::size_t>(i)].req;
        sample.soft_label.reserve(groups * kLocationCount);
        for (std::size_t g = 0; g < groups; ++g) {
            const Eigen::VectorXd soft =
                soften(probs.col(i).segment(static_cast<Eigen::Index>(g * kLocationCount),
                                            static_cast<Eigen::Index>(kLocationCount)),
                       T);
            for (Eigen::Index c = 0; c < soft.size(); ++c) sample.soft_label.push_back(soft(c));
        }
        out.samples.push_back(std::move(sample));
    }
    return out;
}

SoftBatch soft_batch(const SoftDataset& ds, const FeatureCodec& codec) {
    if (ds.samples.empty()) throw std::invalid_argument("soft_batch: empty dataset");
    const std::size_t out_dim = ds.spec.num_subtasks * kLocationCount;
    if (codec.spec.num_subtasks != ds.spec.num_subtasks) {
        throw std::invalid_argument("codec subtask count does not match the dataset");
    }

    SoftBatch batch;
    const auto n = static_cast<Eigen::Index>(ds.samples.size());
    batch.features.resize(static_cast<Eigen::Index>(codec.input_dim()), n);
    batch.targets.resize(static_cast<Eigen::Index>(out_dim), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& sample = ds.samples[static_cast<std::size_t>(i)];
        if (sample.soft_label.size() != out_dim) {
            throw std::invalid_argument("soft label length does not match the subtask count");
        }
        batch.features.col(i) = codec.encode(sample.req);
        for (std::size_t k = 0; k < out_dim; ++k) {
            batch.targets(static_cast<Eigen::Index>(k), i) = sample.soft_label[k];
        }
    }
    return batch;
}

TrainResult train_student(const SoftBatch& batch, const Architecture& arch, const TrainConfig& cfg) {
    return train(arch, batch.features, batch.targets, cfg);
}

void save_soft_dataset(const SoftDataset& ds, const std::filesystem::path& path) {
    std::string out;
    nlohmann::json header{
        {"schema", kDatasetSchema},
        {"labels", "soft"},
        {"seed", ds.seed},
        {"spec", spec_to_json(ds.spec)},
    };
    out += header.dump();
    out += '\n';
    for (const auto& sample : ds.samples) {
        nlohmann::json line;
        requirement_to_json(sample.req, line);
        line["soft_label"] = sample.soft_label;
        out += line.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

SoftDataset load_soft_dataset(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);

    SoftDataset ds;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            parse_fail(path, lineno, e.what());
        }
        try {
            if (!have_header) {
                const auto schema = j.value("schema", std::string());
                if (schema != kDatasetSchema) {
                    throw std::runtime_error("unsupported dataset schema \"" + schema + "\" (expected " +
                                             kDatasetSchema + ")");
                }
                const auto labels = j.value("labels", std::string());
                if (labels != "soft") {
                    throw std::runtime_error("dataset labels are \"" + labels + "\", expected \"soft\"");
                }
                if (!j.contains("seed") || !j["seed"].is_number_unsigned()) {
                    throw std::runtime_error("header is missing an unsigned \"seed\"");
                }
                ds.seed = j["seed"].get<std::uint64_t>();
                if (!j.contains("spec")) throw std::runtime_error("header is missing \"spec\"");
                ds.spec = spec_from_json(j["spec"]);
                have_header = true;
                continue;
            }
            SoftSample sample;
            sample.req = requirement_from_json(j);
            if (sample.req.subtask_count() != ds.spec.num_subtasks) {
                throw std::runtime_error("sample has " + std::to_string(sample.req.subtask_count()) +
                                         " subtasks, spec declares " + std::to_string(ds.spec.num_subtasks));
            }
            if (!j.contains("soft_label") || !j["soft_label"].is_array()) {
                throw std::runtime_error("sample is missing a \"soft_label\" array");
            }
            for (const auto& v : j["soft_label"]) {
                if (!v.is_number()) throw std::runtime_error("soft_label entries must be numbers");
                sample.soft_label.push_back(v.get<double>());
            }
            if (sample.soft_label.size() != ds.spec.num_subtasks * kLocationCount) {
                throw std::runtime_error("soft_label has " + std::to_string(sample.soft_label.size()) +
                                         " entries, expected " +
                                         std::to_string(ds.spec.num_subtasks * kLocationCount));
            }
            ds.samples.push_back(std::move(sample));
        } catch (const std::exception& e) {
            parse_fail(path, lineno, e.what());
        }
    }
    if (!have_header) {
        throw std::runtime_error(path.string() + ": empty dataset file (missing header record)");
    }
    return ds;
}

}  // namespace offload
