#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "offload/io.hpp"
#include "offload/rng.hpp"
#include "offload/solvers.hpp"
#include "offload/workload.hpp"

using namespace offload;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "offload_workload_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
    if (a.spec != b.spec || a.seed != b.seed || a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const auto& sa = a.samples[i];
        const auto& sb = b.samples[i];
        if (sa.label.locs != sb.label.locs) return false;
        if (sa.req.task.cycles != sb.req.task.cycles) return false;
        if (sa.req.task.flow_bytes != sb.req.task.flow_bytes) return false;
        if (sa.req.env.device_hz != sb.req.env.device_hz) return false;
        if (sa.req.env.edge_hz != sb.req.env.edge_hz) return false;
        if (sa.req.env.wireless_bps != sb.req.env.wireless_bps) return false;
        if (sa.req.env.backhaul_bps != sb.req.env.backhaul_bps) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("presets carry the documented ranges") {
    const DistributionSpec cloud = preset("cloud_scale");
    CHECK(cloud.num_subtasks == 6);
    CHECK(cloud.cycles == Range{0.0, 2000e6});
    CHECK(cloud.flow_bytes == Range{0.0, 10e6});
    CHECK(cloud.device_hz == Range{100e6, 1000e6});
    CHECK(cloud.edge_hz == Range{500e6, 5000e6});
    CHECK(cloud.wireless_bps == Range{0.0, 2e6});
    CHECK(cloud.backhaul_bps == Range{0.0, 3e6});

    const DistributionSpec edge = preset("edge_scale");
    CHECK(edge.cycles == Range{500e6, 1500e6});
    CHECK(edge.flow_bytes == Range{3e6, 8e6});
    // everything else matches the broad preset
    CHECK(edge.num_subtasks == cloud.num_subtasks);
    CHECK(edge.device_hz == cloud.device_hz);
    CHECK(edge.edge_hz == cloud.edge_hz);
    CHECK(edge.wireless_bps == cloud.wireless_bps);
    CHECK(edge.backhaul_bps == cloud.backhaul_bps);

    CHECK_THROWS_WITH_AS(preset("warehouse_scale"),
                         "unknown preset \"warehouse_scale\" (expected cloud_scale or edge_scale)",
                         std::invalid_argument);
}

TEST_CASE("samples respect ranges and positivity floors") {
    Rng rng(2024);
    const DistributionSpec spec = preset("cloud_scale");
    for (int i = 0; i < 2000; ++i) {
        const Requirement req = sample_requirement(spec, rng);
        REQUIRE(req.subtask_count() == 6);
        REQUIRE(req.task.flow_bytes.size() == 7);
        for (double c : req.task.cycles) {
            CHECK(c >= 0.0);
            CHECK(c < 2000e6);
        }
        for (double d : req.task.flow_bytes) {
            CHECK(d >= 0.0);
            CHECK(d < 10e6);
        }
        CHECK(req.env.device_hz >= kMinComputeHz);
        CHECK(req.env.edge_hz >= kMinComputeHz);
        CHECK(req.env.device_hz < 1000e6);
        CHECK(req.env.wireless_bps >= kMinBandwidthBps);
        CHECK(req.env.wireless_bps < 2e6);
        CHECK(req.env.backhaul_bps >= kMinBandwidthBps);
        CHECK(req.env.backhaul_bps < 3e6);
    }
}

TEST_CASE("empirical mean of cycles over 10K draws is (lo+hi)/2 within 3%") {
    Rng rng(7);
    const DistributionSpec spec = preset("cloud_scale");
    double sum = 0.0;
    std::size_t count = 0;
    for (int i = 0; i < 10000; ++i) {
        const Requirement req = sample_requirement(spec, rng);
        for (double c : req.task.cycles) {
            sum += c;
            ++count;
        }
    }
    const double mean = sum / static_cast<double>(count);
    CHECK(mean > 1000e6 * 0.97);
    CHECK(mean < 1000e6 * 1.03);
}

TEST_CASE("collapsed ranges produce the unique requirement") {
    DistributionSpec spec;
    spec.num_subtasks = 2;
    spec.cycles = {300e6, 300e6};
    spec.flow_bytes = {5e6, 5e6};
    spec.device_hz = {2e8, 2e8};
    spec.edge_hz = {1e9, 1e9};
    spec.wireless_bps = {1e6, 1e6};
    spec.backhaul_bps = {2e6, 2e6};
    Rng rng(1);
    const Requirement req = sample_requirement(spec, rng);
    CHECK(req.task.cycles == std::vector<double>{300e6, 300e6});
    CHECK(req.task.flow_bytes == std::vector<double>{5e6, 5e6, 5e6});
    CHECK(req.env.device_hz == 2e8);
    CHECK(req.env.backhaul_bps == 2e6);

    // A collapsed range below the floor is accepted as-is (degenerate
    // uniform), as long as it is positive.
    spec.wireless_bps = {5e3, 5e3};
    Rng rng2(2);
    CHECK(sample_requirement(spec, rng2).env.wireless_bps == 5e3);
}

TEST_CASE("spec validation") {
    DistributionSpec spec = preset("cloud_scale");

    SUBCASE("lo > hi is rejected") {
        spec.cycles = {10.0, 5.0};
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
    SUBCASE("num_subtasks must be positive") {
        spec.num_subtasks = 0;
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
    SUBCASE("a non-degenerate rate range entirely below the floor cannot terminate resampling") {
        spec.wireless_bps = {0.0, 5e3};  // below the 1e4 B/s floor
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
    SUBCASE("zero-width zero ranges for bandwidth are rejected") {
        spec.backhaul_bps = {0.0, 0.0};
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
}

TEST_CASE("generation is deterministic and independent of worker count") {
    const DistributionSpec spec = preset("cloud_scale");
    auto labeler = make_greedy_policy();  // cheap and stateless

    const Dataset a = generate_dataset(spec, 64, *labeler, 42, 1);
    const Dataset b = generate_dataset(spec, 64, *labeler, 42, 1);
    const Dataset c = generate_dataset(spec, 64, *labeler, 42, 3);
    const Dataset d = generate_dataset(spec, 64, *labeler, 43, 1);

    CHECK(datasets_equal(a, b));
    CHECK(datasets_equal(a, c));
    CHECK(!datasets_equal(a, d));
}

TEST_CASE("labels come from the labeler") {
    const DistributionSpec spec = preset("edge_scale");
    auto oracle = make_exhaustive_policy();
    const Dataset ds = generate_dataset(spec, 20, *oracle, 5, 1);
    for (const auto& sample : ds.samples) {
        const auto [best, latency] = solve_exhaustive(sample.req);
        CHECK(sample.label.locs == best.locs);
        CHECK(total_latency(sample.req, sample.label) == latency);
    }
}

TEST_CASE("dataset files round-trip exactly") {
    const auto path = temp_dir() / "roundtrip.jsonl";
    const DistributionSpec spec = preset("cloud_scale");
    auto oracle = make_exhaustive_policy();
    const Dataset ds = generate_dataset(spec, 50, *oracle, 77, 0);

    save_dataset(ds, path);
    const Dataset back = load_dataset(path);
    CHECK(datasets_equal(ds, back));

    // Writing the same dataset twice produces identical bytes.
    const auto path2 = temp_dir() / "roundtrip2.jsonl";
    save_dataset(ds, path2);
    CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("loader reports the offending file and line") {
    const auto dir = temp_dir();

    SUBCASE("empty file") {
        const auto path = dir / "empty.jsonl";
        write_file_atomic(path, "");
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("missing header"), std::runtime_error);
    }
    SUBCASE("malformed json names the line") {
        const auto path = dir / "garbled.jsonl";
        const DistributionSpec spec = preset("cloud_scale");
        auto labeler = make_greedy_policy();
        Dataset ds = generate_dataset(spec, 3, *labeler, 1, 1);
        save_dataset(ds, path);
        std::string text = read_file(path);
        text += "{not json\n";
        write_file_atomic(path, text);
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains(":5:"), std::runtime_error);
    }
    SUBCASE("label length mismatch names the line") {
        const auto path = dir / "badlabel.jsonl";
        const DistributionSpec spec = preset("cloud_scale");
        auto labeler = make_greedy_policy();
        Dataset ds = generate_dataset(spec, 2, *labeler, 1, 1);
        ds.samples[1].label.locs.pop_back();
        save_dataset(ds, path);
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains(":3:"), std::runtime_error);
    }
    SUBCASE("schema version mismatch is refused") {
        const auto path = dir / "badschema.jsonl";
        write_file_atomic(path, "{\"schema\":\"offload.dataset/9\",\"labels\":\"hard\",\"seed\":1}\n");
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("schema"), std::runtime_error);
    }
    SUBCASE("soft datasets are refused by the hard loader") {
        const auto path = dir / "softheader.jsonl";
        write_file_atomic(
            path,
            "{\"schema\":\"offload.dataset/1\",\"labels\":\"soft\",\"seed\":1,\"spec\":{}}\n");
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("soft"), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_dataset(dir / "no_such_file.jsonl"), std::runtime_error);
    }
}

TEST_CASE("generate_dataset validates its inputs") {
    const DistributionSpec spec = preset("cloud_scale");
    auto labeler = make_greedy_policy();
    CHECK_THROWS_AS(generate_dataset(spec, 0, *labeler, 1, 1), std::invalid_argument);
}
