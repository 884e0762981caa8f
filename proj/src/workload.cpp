#include "offload/workload.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include <json.hpp>

#include "offload/io.hpp"
#include "offload/serde.hpp"

namespace offload {

namespace {

constexpr const char* kDatasetSchema = "offload.dataset/1";

void check_range(const Range& r, const char* name) {
    if (!(r.lo <= r.hi)) {
        throw std::invalid_argument(std::string(name) + ": lo must be <= hi");
    }
    if (r.lo < 0.0) {
        throw std::invalid_argument(std::string(name) + ": negative values make no physical sense");
    }
}

// Resampling below `floor` must be able to terminate: either the range is a
// single point (accepted as-is) or it extends strictly above the floor.
void check_floored_range(const Range& r, double floor, const char* name) {
    check_range(r, name);
    if (!(r.hi > 0.0)) {
        throw std::invalid_argument(std::string(name) + ": hi must be positive");
    }
    if (r.lo != r.hi && r.hi <= floor) {
        throw std::invalid_argument(std::string(name) + ": range lies entirely below the positivity floor");
    }
}

double draw_floored(Rng& rng, const Range& r, double floor) {
    if (r.lo == r.hi) return r.lo;
    double v = rng.uniform(r.lo, r.hi);
    while (v < floor) v = rng.uniform(r.lo, r.hi);
    return v;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << path.string() << ":" << line << ": " << what;
    throw std::runtime_error(msg.str());
}

}  // namespace

void DistributionSpec::validate() const {
    if (num_subtasks < 1) throw std::invalid_argument("num_subtasks must be >= 1");
    check_range(cycles, "eps_cycles");
    check_range(flow_bytes, "data_bytes");
    check_floored_range(device_hz, kMinComputeHz, "p1_hz");
    check_floored_range(edge_hz, kMinComputeHz, "p2_hz");
    check_floored_range(wireless_bps, kMinBandwidthBps, "b1_bps");
    check_floored_range(backhaul_bps, kMinBandwidthBps, "b2_bps");
}

DistributionSpec preset(std::string_view name) {
    DistributionSpec spec;
    spec.num_subtasks = 6;
    spec.cycles = {0.0, 2000e6};
    spec.flow_bytes = {0.0, 10e6};
    spec.device_hz = {100e6, 1000e6};
    spec.edge_hz = {500e6, 5000e6};
    spec.wireless_bps = {0.0, 2e6};
    spec.backhaul_bps = {0.0, 3e6};
    if (name == "cloud_scale") return spec;
    if (name == "edge_scale") {
        spec.cycles = {500e6, 1500e6};
        spec.flow_bytes = {3e6, 8e6};
        return spec;
    }
    throw std::invalid_argument("unknown preset \"" + std::string(name) + "\" (expected cloud_scale or edge_scale)");
}

Requirement sample_requirement(const DistributionSpec& spec, Rng& rng) {
    spec.validate();
    Requirement req;
    req.task.cycles.reserve(spec.num_subtasks);
    for (std::size_t t = 0; t < spec.num_subtasks; ++t) {
        req.task.cycles.push_back(rng.uniform(spec.cycles.lo, spec.cycles.hi));
    }
    req.task.flow_bytes.reserve(spec.num_subtasks + 1);
    for (std::size_t t = 0; t <= spec.num_subtasks; ++t) {
        req.task.flow_bytes.push_back(rng.uniform(spec.flow_bytes.lo, spec.flow_bytes.hi));
    }
    req.env.device_hz = draw_floored(rng, spec.device_hz, kMinComputeHz);
    req.env.edge_hz = draw_floored(rng, spec.edge_hz, kMinComputeHz);
    req.env.wireless_bps = draw_floored(rng, spec.wireless_bps, kMinBandwidthBps);
    req.env.backhaul_bps = draw_floored(rng, spec.backhaul_bps, kMinBandwidthBps);
    req.validate();
    return req;
}

Dataset generate_dataset(const DistributionSpec& spec, std::size_t n, Policy& labeler, std::uint64_t seed,
                         std::size_t workers) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, n);

    Dataset ds;
    ds.spec = spec;
    ds.seed = seed;
    ds.samples.resize(n);

    // Sample i always comes from substream (seed, i), so the split across
    // workers cannot change the result.
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(derive_seed(seed, i));
            Requirement req = sample_requirement(spec, rng);
            Decision label = labeler.decide(req);
            ds.samples[i] = LabeledSample{std::move(req), std::move(label)};
        }
    };

    if (workers == 1) {
        run(0, n);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::string out;
    nlohmann::json header{
        {"schema", kDatasetSchema},
        {"labels", "hard"},
        {"seed", ds.seed},
        {"spec", spec_to_json(ds.spec)},
    };
    out += header.dump();
    out += '\n';
    for (const auto& sample : ds.samples) {
        nlohmann::json line;
        requirement_to_json(sample.req, line);
        auto& label = line["label"] = nlohmann::json::array();
        for (Location loc : sample.label.locs) label.push_back(static_cast<int>(loc));
        out += line.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

Dataset load_dataset(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);

    Dataset ds;
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
                if (labels != "hard") {
                    throw std::runtime_error("dataset labels are \"" + labels + "\", expected \"hard\"");
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
            LabeledSample sample;
            sample.req = requirement_from_json(j);
            if (sample.req.subtask_count() != ds.spec.num_subtasks) {
                throw std::runtime_error("sample has " + std::to_string(sample.req.subtask_count()) +
                                         " subtasks, spec declares " + std::to_string(ds.spec.num_subtasks));
            }
            if (!j.contains("label") || !j["label"].is_array()) {
                throw std::runtime_error("sample is missing a \"label\" array");
            }
            for (const auto& code : j["label"]) {
                if (!code.is_number_integer()) throw std::runtime_error("label entries must be integers");
                sample.label.locs.push_back(location_from_code(code.get<int>()));
            }
            if (sample.label.size() != ds.spec.num_subtasks) {
                throw std::runtime_error("label has " + std::to_string(sample.label.size()) +
                                         " entries, expected " + std::to_string(ds.spec.num_subtasks));
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
