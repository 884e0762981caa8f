#include "offload/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "offload/io.hpp"
#include "offload/rng.hpp"

namespace offload {

namespace {

constexpr const char* kCsvHeader =
    "name,mean_latency_s,normalized_latency,per_label_accuracy,exact_match,"
    "mean_inference_delay_s,delay_normalized_to_greedy";

std::string format_cell(const std::optional<double>& v) {
    if (!v) return "";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", *v);
    return buf;
}

std::optional<double> parse_cell(const std::string& cell, std::size_t lineno) {
    if (cell.empty()) return std::nullopt;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": bad numeric cell \"" + cell + "\"");
    }
    if (pos != cell.size()) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": bad numeric cell \"" + cell + "\"");
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

// Keeps the optimizer from discarding decision results in timing loops.
volatile std::uint64_t g_bench_sink = 0;

}  // namespace

std::vector<PolicyReport> evaluate(const std::vector<Policy*>& policies, const Dataset& testset) {
    if (testset.samples.empty()) throw std::invalid_argument("evaluate: empty test set");

    double label_latency_sum = 0.0;
    for (const auto& sample : testset.samples) {
        label_latency_sum += total_latency(sample.req, sample.label);
    }
    const double n = static_cast<double>(testset.samples.size());
    const double optimal_mean = label_latency_sum / n;
    if (!(optimal_mean > 0.0)) {
        throw std::invalid_argument("evaluate: optimal mean latency is not positive; cannot normalize");
    }

    std::vector<PolicyReport> reports;
    reports.reserve(policies.size());
    for (Policy* policy : policies) {
        if (policy == nullptr) throw std::invalid_argument("evaluate: null policy");
        double latency_sum = 0.0;
        std::size_t label_hits = 0, exact_hits = 0, groups_total = 0;
        for (const auto& sample : testset.samples) {
            const Decision dec = policy->decide(sample.req);
            latency_sum += total_latency(sample.req, dec);
            std::size_t hits = 0;
            for (std::size_t g = 0; g < sample.label.size(); ++g) {
                hits += dec.locs[g] == sample.label.locs[g] ? 1 : 0;
            }
            label_hits += hits;
            exact_hits += hits == sample.label.size() ? 1 : 0;
            groups_total += sample.label.size();
        }
        PolicyReport report;
        report.name = policy->name();
        report.mean_latency_s = latency_sum / n;
        report.normalized_latency = *report.mean_latency_s / optimal_mean;
        report.per_label_accuracy = static_cast<double>(label_hits) / static_cast<double>(groups_total);
        report.exact_match = static_cast<double>(exact_hits) / n;
        reports.push_back(std::move(report));
    }
    return reports;
}

double bench_inference(Policy& policy, const std::vector<Requirement>& reqs, std::size_t repetitions) {
    if (reqs.empty()) throw std::invalid_argument("bench_inference: no requirements");
    if (repetitions < 1) throw std::invalid_argument("bench_inference: repetitions must be >= 1");

    std::uint64_t sink = 0;
    for (const auto& req : reqs) {  // warmup: caches, lazy allocations
        sink += static_cast<std::uint64_t>(policy.decide(req).locs[0]);
    }

    const auto start = std::chrono::steady_clock::now();
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        for (const auto& req : reqs) {
            sink += static_cast<std::uint64_t>(policy.decide(req).locs[0]);
        }
    }
    const auto stop = std::chrono::steady_clock::now();
    g_bench_sink = sink;

    const double seconds = std::chrono::duration<double>(stop - start).count();
    return seconds / (static_cast<double>(repetitions) * static_cast<double>(reqs.size()));
}

std::string report_csv(const std::vector<PolicyReport>& reports) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : reports) {
        out += r.name;
        out += ',' + format_cell(r.mean_latency_s);
        out += ',' + format_cell(r.normalized_latency);
        out += ',' + format_cell(r.per_label_accuracy);
        out += ',' + format_cell(r.exact_match);
        out += ',' + format_cell(r.mean_inference_delay_s);
        out += ',' + format_cell(r.delay_normalized_to_greedy);
        out += '\n';
    }
    return out;
}

void write_report_csv(const std::vector<PolicyReport>& reports, const std::filesystem::path& path) {
    write_file_atomic(path, report_csv(reports));
}

std::vector<PolicyReport> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::vector<PolicyReport> reports;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!have_header) {
            if (line != kCsvHeader) throw std::runtime_error("line 1: unexpected CSV header");
            have_header = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 7) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": expected 7 cells, got " +
                                     std::to_string(cells.size()));
        }
        PolicyReport r;
        r.name = cells[0];
        r.mean_latency_s = parse_cell(cells[1], lineno);
        r.normalized_latency = parse_cell(cells[2], lineno);
        r.per_label_accuracy = parse_cell(cells[3], lineno);
        r.exact_match = parse_cell(cells[4], lineno);
        r.mean_inference_delay_s = parse_cell(cells[5], lineno);
        r.delay_normalized_to_greedy = parse_cell(cells[6], lineno);
        reports.push_back(std::move(r));
    }
    if (!have_header) throw std::runtime_error("empty CSV report");
    return reports;
}

Architecture teacher_architecture(std::size_t num_subtasks) {
    return Architecture{.input_dim = 2 * num_subtasks + 5,
                        .hidden = {256, 256, 256, 256, 256},
                        .num_groups = num_subtasks,
                        .group_size = kLocationCount};
}

Architecture student_architecture(std::size_t num_subtasks) {
    return Architecture{.input_dim = 2 * num_subtasks + 5,
                        .hidden = {32, 32},
                        .num_groups = num_subtasks,
                        .group_size = kLocationCount};
}

LargeExperiment experiment_large(const LargeOptions& opts) {
    const DistributionSpec spec = preset("cloud_scale");
    auto oracle = make_exhaustive_policy();

    Dataset train_set = generate_dataset(spec, opts.train_samples, *oracle, derive_seed(opts.seed, 1),
                                         opts.workers);
    Dataset test_set = generate_dataset(spec, opts.test_samples, *oracle, derive_seed(opts.seed, 2),
                                        opts.workers);

    TrainConfig cfg = opts.train_cfg;
    cfg.seed = derive_seed(opts.seed, 3);
    TeacherResult teacher = train_teacher(train_set, opts.arch, cfg);

    auto teacher_policy = make_model_policy(teacher.model, teacher.codec, "Teacher");
    auto greedy = make_greedy_policy();
    auto local = fixed_policy(Location::Device, "Local");
    auto edge = fixed_policy(Location::Edge);
    auto cloud = fixed_policy(Location::Cloud);
    auto random = random_policy(derive_seed(opts.seed, 4));

    LargeExperiment out;
    out.reports = evaluate({oracle.get(), teacher_policy.get(), greedy.get(), local.get(), edge.get(),
                            cloud.get(), random.get()},
                           test_set);
    out.teacher = ModelArtifact{.model = std::move(teacher.model), .codec = teacher.codec};
    out.test_set = std::move(test_set);
    return out;
}

KdExperiment experiment_kd(const KdOptions& opts, const ModelArtifact& teacher, const Dataset& testset) {
    const DistributionSpec spec = preset("edge_scale");
    auto oracle = make_exhaustive_policy();

    Dataset edge_set = generate_dataset(spec, opts.train_samples, *oracle, derive_seed(opts.seed, 1),
                                        opts.workers);

    TrainConfig cfg = opts.train_cfg;
    cfg.seed = derive_seed(opts.seed, 2);  // same init and shuffles for both students

    FeatureCodec teacher_codec = teacher.codec;
    SoftDataset soft = distill_labels(teacher.model, teacher_codec, edge_set, Temperature(opts.temperature));
    TrainResult kd = train_student(soft_batch(soft, teacher_codec), opts.arch, cfg);

    TeacherResult base = train_teacher(edge_set, opts.arch, cfg);

    auto kd_policy = make_model_policy(kd.model, teacher_codec, "KD-DIL");
    auto base_policy = make_model_policy(base.model, base.codec, "Baseline-DIL");
    auto greedy = make_greedy_policy();

    KdExperiment out;
    out.reports = evaluate({oracle.get(), kd_policy.get(), base_policy.get(), greedy.get()}, testset);
    out.student = ModelArtifact{.model = std::move(kd.model), .codec = std::move(teacher_codec)};
    out.baseline = ModelArtifact{.model = std::move(base.model), .codec = std::move(base.codec)};
    return out;
}

std::vector<PolicyReport> experiment_bench(const BenchOptions& opts, const ModelArtifact& teacher,
                                           const ModelArtifact& student) {
    if (opts.decisions < 1 || opts.distinct_reqs < 1) {
        throw std::invalid_argument("experiment_bench: decision counts must be >= 1");
    }
    const DistributionSpec spec = preset("cloud_scale");
    std::vector<Requirement> reqs;
    reqs.reserve(opts.distinct_reqs);
    for (std::size_t i = 0; i < opts.distinct_reqs; ++i) {
        Rng rng(derive_seed(opts.seed, i));
        reqs.push_back(sample_requirement(spec, rng));
    }
    const std::size_t reps = (opts.decisions + opts.distinct_reqs - 1) / opts.distinct_reqs;

    auto student_policy = make_model_policy(student.model, student.codec, "KD-DIL");
    auto teacher_policy = make_model_policy(teacher.model, teacher.codec, "Large DIL");
    auto greedy = make_greedy_policy();
    auto oracle = make_exhaustive_policy();

    struct Row {
        Policy* policy;
        double delay;
    };
    std::vector<Row> rows{{student_policy.get(), 0.0},
                          {teacher_policy.get(), 0.0},
                          {greedy.get(), 0.0},
                          {oracle.get(), 0.0}};
    for (auto& row : rows) row.delay = bench_inference(*row.policy, reqs, reps);

    const double greedy_delay = rows[2].delay;
    std::vector<PolicyReport> reports;
    reports.reserve(rows.size());
    for (const auto& row : rows) {
        PolicyReport r;
        r.name = row.policy->name();
        r.mean_inference_delay_s = row.delay;
        if (greedy_delay > 0.0) r.delay_normalized_to_greedy = row.delay / greedy_delay;
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace offload
