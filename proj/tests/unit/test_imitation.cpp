#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "offload/imitation.hpp"
#include "offload/io.hpp"
#include "offload/rng.hpp"
#include "offload/solvers.hpp"

using namespace offload;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "offload_imitation_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

Requirement endpoint_requirement(const DistributionSpec& spec, bool hi) {
    Requirement req;
    req.task.cycles.assign(spec.num_subtasks, hi ? spec.cycles.hi : spec.cycles.lo);
    req.task.flow_bytes.assign(spec.num_subtasks + 1, hi ? spec.flow_bytes.hi : spec.flow_bytes.lo);
    req.env.device_hz = hi ? spec.device_hz.hi : spec.device_hz.lo;
    req.env.edge_hz = hi ? spec.edge_hz.hi : spec.edge_hz.lo;
    req.env.wireless_bps = hi ? spec.wireless_bps.hi : spec.wireless_bps.lo;
    req.env.backhaul_bps = hi ? spec.backhaul_bps.hi : spec.backhaul_bps.lo;
    return req;
}

}  // namespace

TEST_CASE("codec maps range endpoints to 0 and 1 and midpoints linearly") {
    const DistributionSpec spec = preset("cloud_scale");
    const FeatureCodec codec{spec};
    REQUIRE(codec.input_dim() == 17);

    const Eigen::VectorXd flo = codec.encode(endpoint_requirement(spec, false));
    REQUIRE(flo.size() == 17);
    CHECK(flo.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));

    const Eigen::VectorXd fhi = codec.encode(endpoint_requirement(spec, true));
    CHECK((fhi.array() - 1.0).abs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));

    Requirement mid = endpoint_requirement(spec, false);
    mid.task.cycles[0] = 1000e6;  // halfway through [0, 2000e6]
    CHECK(codec.encode(mid)(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("codec extrapolates outside the range instead of clamping") {
    const DistributionSpec spec = preset("cloud_scale");
    const FeatureCodec codec{spec};

    Requirement req = endpoint_requirement(spec, false);
    req.task.cycles[0] = 4000e6;  // 2x the upper bound
    CHECK(codec.encode(req)(0) == doctest::Approx(2.0).epsilon(1e-12));

    req.task.cycles[0] = -500e6;
    CHECK(codec.encode(req)(0) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("codec maps a collapsed range to 0") {
    DistributionSpec spec = preset("cloud_scale");
    spec.device_hz = {300e6, 300e6};
    const FeatureCodec codec{spec};

    Rng rng(5);
    const Requirement req = sample_requirement(spec, rng);
    const Eigen::VectorXd f = codec.encode(req);
    CHECK(f(13) == 0.0);  // 6 cycles + 7 flows, then device_hz
}

TEST_CASE("codec rejects requirements with a different subtask count") {
    const DistributionSpec spec = preset("cloud_scale");
    const FeatureCodec codec{spec};

    Requirement req;
    req.task.cycles.assign(4, 1e6);
    req.task.flow_bytes.assign(5, 1e3);
    req.env = {1e8, 1e9, 1e6, 2e6};
    CHECK_THROWS_AS((void)codec.encode(req), std::invalid_argument);
}

TEST_CASE("one-hot targets put a single 1 in each group") {
    const Decision dec{{Location::Edge, Location::Device, Location::Cloud}};
    const Eigen::VectorXd t = one_hot_target(dec);
    REQUIRE(t.size() == 9);
    Eigen::VectorXd expect(9);
    expect << 0, 1, 0, 1, 0, 0, 0, 0, 1;
    CHECK((t - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decode takes the per-group argmax and resolves ties to the lowest code") {
    Eigen::VectorXd probs(6);
    probs << 0.2, 0.7, 0.1,           // clear Edge
        1.0 / 3, 1.0 / 3, 1.0 / 3;    // three-way tie: Device
    const Decision dec = decode(probs, 2);
    REQUIRE(dec.size() == 2);
    CHECK(dec.locs[0] == Location::Edge);
    CHECK(dec.locs[1] == Location::Device);

    Eigen::VectorXd tied(3);
    tied << 0.25, 0.25, 0.5;
    CHECK(decode(tied, 1).locs[0] == Location::Cloud);
    tied << 0.4, 0.4, 0.2;  // two-way tie: Device over Edge
    CHECK(decode(tied, 1).locs[0] == Location::Device);

    CHECK_THROWS_AS((void)decode(probs, 4), std::invalid_argument);  // 6 values are not 4 groups
}

TEST_CASE("a zero model predicts all-Device") {
    const DistributionSpec spec = preset("cloud_scale");
    const FeatureCodec codec{spec};
    const MlpModel model = zero_model(Architecture{.input_dim = 17, .hidden = {4}, .num_groups = 6});

    Rng rng(7);
    const Requirement req = sample_requirement(spec, rng);
    const Decision dec = predict(model, codec, req);
    for (Location loc : dec.locs) CHECK(loc == Location::Device);
}

TEST_CASE("a one-sample dataset is memorized") {
    DistributionSpec spec = preset("edge_scale");
    spec.num_subtasks = 3;
    Rng rng(9);

    Dataset ds;
    ds.spec = spec;
    ds.seed = 9;
    const Requirement req = sample_requirement(spec, rng);
    const Decision label{{Location::Edge, Location::Cloud, Location::Edge}};
    ds.samples.push_back({req, label});

    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.val_fraction = 0.0;
    cfg.seed = 2;
    const TeacherResult res =
        train_teacher(ds, Architecture{.input_dim = 11, .hidden = {16}, .num_groups = 3}, cfg);
    CHECK(predict(res.model, res.codec, req) == label);
}

TEST_CASE("accuracy over a zero model counts Device labels") {
    const DistributionSpec spec = preset("cloud_scale");
    const FeatureCodec codec{spec};
    const MlpModel model = zero_model(Architecture{.input_dim = 17, .hidden = {}, .num_groups = 6});

    // Labels drawn uniformly at random: a constant predictor scores 1/3 per label
    // and 3^-6 on exact matches, in expectation.
    Dataset ds;
    ds.spec = spec;
    ds.seed = 0;
    Rng rng(33);
    const std::size_t n = 10000;
    std::size_t device_labels = 0;
    std::size_t all_device = 0;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledSample s;
        s.req = sample_requirement(spec, rng);
        bool all = true;
        for (int g = 0; g < 6; ++g) {
            const auto code = static_cast<int>(rng.below(3));
            s.label.locs.push_back(static_cast<Location>(code));
            device_labels += code == 0 ? 1 : 0;
            all = all && code == 0;
        }
        all_device += all ? 1 : 0;
        ds.samples.push_back(std::move(s));
    }

    const AccuracyReport rep = accuracy(model, codec, ds);
    CHECK(rep.per_label == doctest::Approx(static_cast<double>(device_labels) / (6.0 * n)).epsilon(1e-12));
    CHECK(rep.exact_match == doctest::Approx(static_cast<double>(all_device) / n).epsilon(1e-12));
    CHECK(rep.per_label == doctest::Approx(1.0 / 3.0).epsilon(0.06));
    CHECK(rep.exact_match <= rep.per_label);
}

TEST_CASE("model policy wraps predict under the given name") {
    const DistributionSpec spec = preset("edge_scale");
    const FeatureCodec codec{spec};
    const MlpModel model = init_model(Architecture{.input_dim = 17, .hidden = {8}, .num_groups = 6}, 3);

    const auto policy = make_model_policy(model, codec, "KD-DIL");
    CHECK(policy->name() == "KD-DIL");

    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        const Requirement req = sample_requirement(spec, rng);
        CHECK(policy->decide(req) == predict(model, codec, req));
    }
}

TEST_CASE("train_teacher rejects an architecture that does not fit the dataset") {
    const DistributionSpec spec = preset("cloud_scale");
    Rng rng(3);
    Dataset ds;
    ds.spec = spec;
    ds.seed = 3;
    LabeledSample s;
    s.req = sample_requirement(spec, rng);
    s.label = Decision::filled(6, Location::Device);
    ds.samples.push_back(s);

    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.val_fraction = 0.0;
    CHECK_THROWS_AS(
        (void)train_teacher(ds, Architecture{.input_dim = 16, .hidden = {4}, .num_groups = 6}, cfg),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)train_teacher(ds, Architecture{.input_dim = 17, .hidden = {4}, .num_groups = 5}, cfg),
        std::invalid_argument);
    CHECK_THROWS_AS((void)train_teacher(Dataset{spec, 0, {}},
                                        Architecture{.input_dim = 17, .hidden = {4}, .num_groups = 6}, cfg),
                    std::invalid_argument);
}

TEST_CASE("artifacts round-trip the model together with its codec") {
    const auto dir = temp_dir();
    const DistributionSpec spec = preset("edge_scale");
    const ModelArtifact art{init_model(Architecture{.input_dim = 17, .hidden = {8, 8}, .num_groups = 6}, 5),
                            FeatureCodec{spec}};

    const auto path = dir / "artifact.json";
    save_artifact(art, path);
    const ModelArtifact back = load_artifact(path);
    CHECK(model_to_json(art.model).dump() == model_to_json(back.model).dump());
    CHECK(back.codec.spec == spec);

    Rng rng(19);
    const Requirement req = sample_requirement(spec, rng);
    CHECK(predict(back.model, back.codec, req) == predict(art.model, art.codec, req));

    SUBCASE("wrong schema") {
        write_file_atomic(path, "{\"schema\":\"offload.artifact/9\"}");
        CHECK_THROWS_WITH_AS(load_artifact(path), doctest::Contains("schema"), std::runtime_error);
    }
    SUBCASE("codec and model disagree") {
        // 4-subtask codec needs 13 inputs; the stored model wants 17.
        ModelArtifact bad = art;
        bad.codec.spec.num_subtasks = 4;
        CHECK_THROWS_AS(save_artifact(bad, path), std::invalid_argument);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_artifact(dir / "nope.json"), std::runtime_error);
    }
}
