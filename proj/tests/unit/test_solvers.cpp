#include <doctest.h>

#include <functional>
#include <vector>

#include "offload/model.hpp"
#include "offload/rng.hpp"
#include "offload/solvers.hpp"
#include "offload/workload.hpp"

using namespace offload;

namespace {

// Independent oracle: recursive enumeration (front position varies slowest
// here too, but candidates are collected and scanned, not tracked online).
std::pair<Decision, double> enumerate_all(const Requirement& req) {
    std::vector<Decision> all;
    Decision cur;
    std::function<void(std::size_t)> rec = [&](std::size_t t) {
        if (t == req.subtask_count()) {
            all.push_back(cur);
            return;
        }
        for (int c = 0; c < 3; ++c) {
            cur.locs.push_back(static_cast<Location>(c));
            rec(t + 1);
            cur.locs.pop_back();
        }
    };
    rec(0);

    Decision best = all.front();
    double best_latency = total_latency(req, best);
    for (const Decision& d : all) {
        const double latency = total_latency(req, d);
        if (latency < best_latency) {
            best_latency = latency;
            best = d;
        }
    }
    return {best, best_latency};
}

Requirement w1() {
    Requirement req;
    req.task.cycles = {200e6, 400e6};
    req.task.flow_bytes = {2e6, 4e6, 1e6};
    req.env = Environment{.device_hz = 100e6, .edge_hz = 1000e6, .wireless_bps = 1e6, .backhaul_bps = 2e6};
    return req;
}

constexpr Location D = Location::Device;
constexpr Location E = Location::Edge;

}  // namespace

TEST_CASE("exhaustive solver finds the w1 optimum (E,E) at 3.6 s") {
    const auto [best, latency] = solve_exhaustive(w1());
    CHECK(best.locs == std::vector<Location>{E, E});
    CHECK(latency == doctest::Approx(3.6).epsilon(1e-12));
}

TEST_CASE("exhaustive solver agrees with an independent enumerator on random instances") {
    Rng rng(123);
    const DistributionSpec spec = preset("cloud_scale");
    for (int i = 0; i < 50; ++i) {
        const Requirement req = sample_requirement(spec, rng);
        const auto [got_dec, got_lat] = solve_exhaustive(req);
        const auto [want_dec, want_lat] = enumerate_all(req);
        CHECK(got_lat == want_lat);  // same arithmetic path, exact equality
        CHECK(got_dec.locs == want_dec.locs);
    }
}

TEST_CASE("exhaustive latency is a lower bound for every candidate and every baseline") {
    Rng rng(456);
    const DistributionSpec spec = preset("edge_scale");
    auto greedy = make_greedy_policy();
    auto random = random_policy(789);
    for (int i = 0; i < 30; ++i) {
        const Requirement req = sample_requirement(spec, rng);
        const auto [best, best_latency] = solve_exhaustive(req);

        Decision candidate = Decision::filled(req.subtask_count(), Location::Device);
        // walk all 3^n candidates via the same odometer trick, independently
        std::size_t count = 0;
        bool more = true;
        while (more) {
            CHECK(total_latency(req, candidate) >= best_latency);
            ++count;
            more = false;
            for (std::size_t k = candidate.locs.size(); k-- > 0;) {
                if (candidate.locs[k] != Location::Cloud) {
                    candidate.locs[k] = static_cast<Location>(static_cast<int>(candidate.locs[k]) + 1);
                    more = true;
                    break;
                }
                candidate.locs[k] = Location::Device;
            }
        }
        CHECK(count == 729);  // 3^6

        CHECK(total_latency(req, greedy->decide(req)) >= best_latency);
        CHECK(total_latency(req, random->decide(req)) >= best_latency);
        for (Location loc : {Location::Device, Location::Edge, Location::Cloud}) {
            CHECK(total_latency(req, Decision::filled(req.subtask_count(), loc)) >= best_latency);
        }
    }
}

TEST_CASE("ties resolve to the lexicographically smallest decision") {
    // Zero-size flows and a free edge: several placements tie at zero-ish cost.
    Requirement req;
    req.task.cycles = {0.0, 0.0};
    req.task.flow_bytes = {0.0, 0.0, 0.0};
    req.env = Environment{.device_hz = 1e8, .edge_hz = 1e9, .wireless_bps = 1e6, .backhaul_bps = 1e6};
    const auto [best, latency] = solve_exhaustive(req);
    CHECK(latency == 0.0);
    CHECK(best.locs == std::vector<Location>{D, D});  // all 9 candidates tie at 0
}

TEST_CASE("exhaustive guard rejects oversized instances") {
    Requirement req;
    req.task.cycles.assign(13, 1e6);
    req.task.flow_bytes.assign(14, 1e3);
    req.env = Environment{.device_hz = 1e8, .edge_hz = 1e9, .wireless_bps = 1e6, .backhaul_bps = 1e6};
    CHECK_THROWS_AS(solve_exhaustive(req), std::invalid_argument);
}

TEST_CASE("greedy picks (Device,Device) on w1 and (Edge,Edge) when the device is slow") {
    CHECK(solve_greedy(w1()).locs == std::vector<Location>{D, D});

    Requirement slow = w1();
    slow.env.device_hz = 10e6;  // local compute now dominates every transfer
    CHECK(solve_greedy(slow).locs == std::vector<Location>{E, E});
}

TEST_CASE("greedy is myopic: per-step costs on w1 are as hand-computed") {
    // Step 0 costs: Device 2.0, Edge 2.2, Cloud 3.0 -> Device.
    // Step 1 (incl. return transfer): Device 4.0, Edge 5.4, Cloud 7.5 -> Device.
    // Verified here indirectly: flipping d1 to make Edge cheaper at step 1
    // flips only the second placement.
    Requirement req = w1();
    req.task.flow_bytes[1] = 0.1e6;  // step 1: Edge = 0.1 + 0.4 + 1.0 = 1.5 < Device 4.0
    CHECK(solve_greedy(req).locs == std::vector<Location>{D, E});
}

TEST_CASE("policy wrappers expose names and honor the requirement size") {
    auto opt = make_exhaustive_policy();
    auto greedy = make_greedy_policy();
    auto local = fixed_policy(Location::Device, "Local");
    auto edge = fixed_policy(Location::Edge);
    auto random = random_policy(1);

    CHECK(opt->name() == "Optimal");
    CHECK(greedy->name() == "Greedy");
    CHECK(local->name() == "Local");
    CHECK(edge->name() == "Edge");
    CHECK(random->name() == "Random");

    const Requirement req = w1();
    CHECK(opt->decide(req).size() == 2);
    CHECK(local->decide(req).locs == std::vector<Location>{D, D});
    CHECK(edge->decide(req).locs == std::vector<Location>{E, E});

    // Random is deterministic under its seed and draws per subtask.
    auto r1 = random_policy(99);
    auto r2 = random_policy(99);
    for (int i = 0; i < 20; ++i) CHECK(r1->decide(req).locs == r2->decide(req).locs);
}
