#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "offload/distill.hpp"
#include "offload/imitation.hpp"
#include "offload/solvers.hpp"
#include "offload/workload.hpp"

namespace offload {

/// One row of an evaluation or benchmark report. Fields that a given run did
/// not measure stay empty (quality-only runs leave the delay columns empty
/// and vice versa).
struct PolicyReport {
    std::string name;
    std::optional<double> mean_latency_s;
    std::optional<double> normalized_latency;  // mean / optimal-label mean; 1.0 is optimal
    std::optional<double> per_label_accuracy;
    std::optional<double> exact_match;
    std::optional<double> mean_inference_delay_s;
    std::optional<double> delay_normalized_to_greedy;
};

/// Decision quality of each policy on an oracle-labeled test set. The
/// normalizer is the mean latency of the set's own labels, so an exhaustive
/// policy in the list reports exactly 1.0 (same arithmetic path). Accuracy
/// columns compare against the labels for every policy.
std::vector<PolicyReport> evaluate(const std::vector<Policy*>& policies, const Dataset& testset);

/// Mean wall-clock seconds per decision over repetitions passes of reqs
/// (encode + forward + decode for learned policies, the full search for the
/// exhaustive one). Single-threaded; one warmup pass is excluded.
double bench_inference(Policy& policy, const std::vector<Requirement>& reqs, std::size_t repetitions = 1);

/// CSV with the fixed column set
///   name,mean_latency_s,normalized_latency,per_label_accuracy,exact_match,
///   mean_inference_delay_s,delay_normalized_to_greedy
/// Numbers are printed with 17 significant digits, so parse_report_csv
/// recovers them exactly; empty cells are absent optionals.
std::string report_csv(const std::vector<PolicyReport>& reports);
void write_report_csv(const std::vector<PolicyReport>& reports, const std::filesystem::path& path);
std::vector<PolicyReport> parse_report_csv(const std::string& text);

/// The two canonical network shapes for |A| subtasks (input 2|A|+5,
/// output 3|A|): a 5x256 teacher and a 2x32 student.
Architecture teacher_architecture(std::size_t num_subtasks);
Architecture student_architecture(std::size_t num_subtasks);

/// Large-scale imitation experiment: cloud_scale train/test sets labeled by
/// the oracle, a teacher fitted on the train set, and a quality report for
/// {Optimal, Teacher, Greedy, Local, Edge, Cloud, Random}. Every internal
/// seed (data, training, random baseline) derives from `seed`;
/// train_cfg.seed is overridden.
struct LargeOptions {
    std::uint64_t seed = 1;
    std::size_t train_samples = 100000;
    std::size_t test_samples = 10000;
    Architecture arch = teacher_architecture(6);
    TrainConfig train_cfg;
    std::size_t workers = 0;  // dataset labeling only
};

struct LargeExperiment {
    std::vector<PolicyReport> reports;
    ModelArtifact teacher;
    Dataset test_set;  // reused by the distillation experiment
};

LargeExperiment experiment_large(const LargeOptions& opts);

/// Distillation experiment: a small edge_scale training set, a student
/// distilled from the teacher at temperature T (KD-DIL), and a same-shape
/// student trained on the set's hard oracle labels (Baseline-DIL). Both
/// start from identical seeded initializations; the only difference is the
/// training signal (and the matching codec). Evaluated on the passed test
/// set, alongside Optimal and Greedy.
struct KdOptions {
    std::uint64_t seed = 1;
    std::size_t train_samples = 1000;
    double temperature = 5.0;
    Architecture arch = student_architecture(6);
    TrainConfig train_cfg;
    std::size_t workers = 0;
};

struct KdExperiment {
    std::vector<PolicyReport> reports;
    ModelArtifact student;   // KD-DIL, carries the teacher's codec
    ModelArtifact baseline;  // Baseline-DIL, carries its own dataset's codec
};

KdExperiment experiment_kd(const KdOptions& opts, const ModelArtifact& teacher, const Dataset& testset);

/// Per-decision delay of {KD-DIL, Large DIL, Greedy, Optimal} over at least
/// `decisions` decisions each, normalized to Greedy = 1.0.
struct BenchOptions {
    std::uint64_t seed = 1;
    std::size_t decisions = 100000;
    std::size_t distinct_reqs = 10000;
};

std::vector<PolicyReport> experiment_bench(const BenchOptions& opts, const ModelArtifact& teacher,
                                           const ModelArtifact& student);

}  // namespace offload
