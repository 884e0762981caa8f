#include "offload/serde.hpp"

#include <stdexcept>

namespace offload {

namespace {

nlohmann::json range_to_json(const Range& r) { return nlohmann::json::array({r.lo, r.hi}); }

Range range_from_json(const nlohmann::json& j, const char* key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw std::runtime_error(std::string("expected [lo, hi] for \"") + key + "\"");
    }
    return Range{j[0].get<double>(), j[1].get<double>()};
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw std::runtime_error(std::string("missing field \"") + key + "\"");
    return *it;
}

std::vector<double> doubles_from_json(const nlohmann::json& j, const char* key) {
    if (!j.is_array()) throw std::runtime_error(std::string("expected array for \"") + key + "\"");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw std::runtime_error(std::string("non-numeric entry in \"") + key + "\"");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

nlohmann::json spec_to_json(const DistributionSpec& spec) {
    return nlohmann::json{
        {"num_subtasks", spec.num_subtasks}, {"eps_cycles", range_to_json(spec.cycles)},
        {"data_bytes", range_to_json(spec.flow_bytes)}, {"p1_hz", range_to_json(spec.device_hz)},
        {"p2_hz", range_to_json(spec.edge_hz)}, {"b1_bps", range_to_json(spec.wireless_bps)},
        {"b2_bps", range_to_json(spec.backhaul_bps)},
    };
}

DistributionSpec spec_from_json(const nlohmann::json& j) {
    DistributionSpec spec{};
    const auto& n = field(j, "num_subtasks");
    if (!n.is_number_unsigned()) throw std::runtime_error("\"num_subtasks\" must be a non-negative integer");
    spec.num_subtasks = n.get<std::size_t>();
    spec.cycles = range_from_json(field(j, "eps_cycles"), "eps_cycles");
    spec.flow_bytes = range_from_json(field(j, "data_bytes"), "data_bytes");
    spec.device_hz = range_from_json(field(j, "p1_hz"), "p1_hz");
    spec.edge_hz = range_from_json(field(j, "p2_hz"), "p2_hz");
    spec.wireless_bps = range_from_json(field(j, "b1_bps"), "b1_bps");
    spec.backhaul_bps = range_from_json(field(j, "b2_bps"), "b2_bps");
    spec.validate();
    return spec;
}

void requirement_to_json(const Requirement& req, nlohmann::json& out) {
    out["eps_cycles"] = req.task.cycles;
    out["data_bytes"] = req.task.flow_bytes;
    out["p1_hz"] = req.env.device_hz;
    out["p2_hz"] = req.env.edge_hz;
    out["b1_bps"] = req.env.wireless_bps;
    out["b2_bps"] = req.env.backhaul_bps;
}

Requirement requirement_from_json(const nlohmann::json& j) {
    Requirement req;
    req.task.cycles = doubles_from_json(field(j, "eps_cycles"), "eps_cycles");
    req.task.flow_bytes = doubles_from_json(field(j, "data_bytes"), "data_bytes");
    auto scalar = [&](const char* key) {
        const auto& v = field(j, key);
        if (!v.is_number()) throw std::runtime_error(std::string("expected number for \"") + key + "\"");
        return v.get<double>();
    };
    req.env.device_hz = scalar("p1_hz");
    req.env.edge_hz = scalar("p2_hz");
    req.env.wireless_bps = scalar("b1_bps");
    req.env.backhaul_bps = scalar("b2_bps");
    req.validate();
    return req;
}

}  // namespace offload
