#include "offload/model.hpp"

#include <cmath>
#include <stdexcept>

namespace offload {

const char* to_string(Location loc) {
    switch (loc) {
        case Location::Device: return "Device";
        case Location::Edge: return "Edge";
        case Location::Cloud: return "Cloud";
    }
    return "?";
}

Location location_from_code(int code) {
    if (code < 0 || code >= static_cast<int>(kLocationCount)) {
        throw std::invalid_argument("location code out of range: " + std::to_string(code));
    }
    return static_cast<Location>(code);
}

std::string to_string(const Decision& dec) {
    std::string out = "(";
    for (std::size_t i = 0; i < dec.locs.size(); ++i) {
        if (i) out += ",";
        out += to_string(dec.locs[i]);
    }
    out += ")";
    return out;
}

void TaskProfile::validate() const {
    if (cycles.empty()) {
        throw std::invalid_argument("task profile needs at least one subtask");
    }
    if (flow_bytes.size() != cycles.size() + 1) {
        throw std::invalid_argument("task profile needs subtask_count+1 data flow sizes, got " +
                                    std::to_string(flow_bytes.size()));
    }
    for (double c : cycles) {
        if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("cycle counts must be finite and >= 0");
    }
    for (double d : flow_bytes) {
        if (!std::isfinite(d) || d < 0.0) throw std::invalid_argument("flow sizes must be finite and >= 0");
    }
}

void Environment::validate() const {
    for (double v : {device_hz, edge_hz, wireless_bps, backhaul_bps}) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::invalid_argument("compute rates and bandwidths must be finite and > 0");
        }
    }
}

void Requirement::validate() const {
    task.validate();
    env.validate();
}

namespace {

void check_decision_length(const Requirement& req, const Decision& dec) {
    if (dec.locs.size() != req.subtask_count()) {
        throw std::invalid_argument("decision length " + std::to_string(dec.locs.size()) +
                                    " does not match subtask count " + std::to_string(req.subtask_count()));
    }
}

}  // namespace

double link_seconds(Location from, Location to, double bytes, const Environment& env) {
    if (from == to) return 0.0;
    const bool device_involved = from == Location::Device || to == Location::Device;
    const bool cloud_involved = from == Location::Cloud || to == Location::Cloud;
    if (device_involved && cloud_involved) {
        return bytes / env.wireless_bps + bytes / env.backhaul_bps;  // relayed through the edge
    }
    if (cloud_involved) return bytes / env.backhaul_bps;
    return bytes / env.wireless_bps;
}

double exec_latency(const Requirement& req, const Decision& dec) {
    check_decision_length(req, dec);
    double total = 0.0;
    for (std::size_t t = 0; t < dec.locs.size(); ++t) {
        switch (dec.locs[t]) {
            case Location::Device: total += req.task.cycles[t] / req.env.device_hz; break;
            case Location::Edge: total += req.task.cycles[t] / req.env.edge_hz; break;
            case Location::Cloud: break;  // cloud compute time is ignored by the model
        }
    }
    return total;
}

double trans_latency(const Requirement& req, const Decision& dec) {
    check_decision_length(req, dec);
    const std::size_t n = dec.locs.size();
    double total = 0.0;
    Location prev = Location::Device;  // the task input originates at the device
    for (std::size_t t = 0; t < n; ++t) {
        total += link_seconds(prev, dec.locs[t], req.task.flow_bytes[t], req.env);
        prev = dec.locs[t];
    }
    total += link_seconds(prev, Location::Device, req.task.flow_bytes[n], req.env);  // final output returns
    return total;
}

double total_latency(const Requirement& req, const Decision& dec) {
    return exec_latency(req, dec) + trans_latency(req, dec);
}

}  // namespace offload
