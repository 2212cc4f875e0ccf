// Result reports: one JSON document per run plus a flat CSV view carrying the
// same numbers. Wall-clock data lives in a single "timestamp" field so
// golden-file comparisons can mask exactly one key.
#pragma once

#include <chrono>
#include <ctime>
#include <sstream>

#include "eanm/instance_io.hpp"
#include "eanm/routing.hpp"
#include "eanm/validator.hpp"

namespace eanm {

struct RunMeta {
    std::string command;
    std::string instance_path;
    std::string instance_name;
    std::string variant;
    std::string scheme;
    Json options = Json::object();
    uint64_t seed = 0;
    Json limits = Json::object();
};

inline Json make_report(const RunMeta& meta, const std::string& status, double objective,
                        double bound, double gap, long nodes, double wall_ms,
                        const Instance& inst, const Solution* sol,
                        const ValidationReport* validation) {
    Json j;
    j["meta"] = {{"command", meta.command},   {"instance", meta.instance_path},
                 {"name", meta.instance_name}, {"variant", meta.variant},
                 {"scheme", meta.scheme},      {"options", meta.options},
                 {"seed", meta.seed},          {"limits", meta.limits}};
    {
        auto now = std::chrono::system_clock::now();
        std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        j["timestamp"] = {{"started", buf}, {"wall_ms", wall_ms}};
    }
    j["solver"] = {{"status", status},
                   {"objective", objective},
                   {"best_bound", bound},
                   {"gap", gap},
                   {"nodes", nodes}};
    if (sol) {
        Json devices;
        devices["nodes"] = Json::array();
        for (size_t i = 0; i < inst.nodes.size(); ++i) {
            Json row{{"id", inst.nodes[i].id}};
            Json states = Json::array();
            for (int s = 0; s < sol->num_periods; ++s) states.push_back(sol->node_on[s][i] ? 1 : 0);
            row["on"] = std::move(states);
            devices["nodes"].push_back(std::move(row));
        }
        devices["links"] = Json::array();
        Topology topo = make_topology(inst);
        for (int s = 0; s < sol->num_periods; ++s) {
            detail::SolutionLoads loads = detail::solution_loads(inst, topo, *sol, s);
            for (size_t a = 0; a < inst.links.size(); ++a) {
                if (s == 0) {
                    Json row{{"key", arc_key(inst.links[a])}};
                    row["state"] = Json::array();
                    row["load"] = Json::array();
                    row["utilization"] = Json::array();
                    devices["links"].push_back(std::move(row));
                }
                Json& row = devices["links"][a];
                row["state"].push_back(sol->link_state[s][a]);
                double load = sol->smart ? loads.primary_arc[a] : loads.reserved_arc[a];
                row["load"].push_back(load);
                double cap = detail::active_capacity(inst, *sol, s, int(a), sol->smart);
                row["utilization"].push_back(cap > 0.0 ? load / cap : 0.0);
            }
        }
        j["devices"] = std::move(devices);
        j["solution_power"] = sol->total_power;
    }
    if (validation) {
        Json v;
        v["passed"] = validation->passed();
        v["recomputed_power"] = validation->recomputed_power;
        v["families"] = Json::array();
        for (const FamilyResult& f : validation->families)
            v["families"].push_back({{"family", f.family},
                                     {"pass", f.pass},
                                     {"worst_violation", f.worst_violation},
                                     {"offender", f.offender}});
        j["validation"] = std::move(v);
    }
    return j;
}

/// Flat comma-separated view of the report. Carries the same numbers as the
/// JSON document; timing is deliberately left out.
inline std::string report_to_csv(const Json& report) {
    std::ostringstream os;
    os << "section,key,value\n";
    const Json& s = report.at("solver");
    os << "solver,status," << s.at("status").get<std::string>() << "\n";
    os << "solver,objective," << s.at("objective").dump() << "\n";
    os << "solver,best_bound," << s.at("best_bound").dump() << "\n";
    os << "solver,gap," << s.at("gap").dump() << "\n";
    os << "solver,nodes," << s.at("nodes").dump() << "\n";
    if (report.contains("devices")) {
        for (const Json& n : report.at("devices").at("nodes")) {
            os << "node_on," << n.at("id").get<std::string>() << ",";
            const Json& states = n.at("on");
            for (size_t k = 0; k < states.size(); ++k)
                os << (k ? ";" : "") << states[k].dump();
            os << "\n";
        }
        for (const Json& l : report.at("devices").at("links")) {
            std::string key = l.at("key").get<std::string>();
            auto emit = [&](const char* what) {
                os << what << "," << key << ",";
                const Json& arr = l.at(what);
                for (size_t k = 0; k < arr.size(); ++k) os << (k ? ";" : "") << arr[k].dump();
                os << "\n";
            };
            emit("state");
            emit("load");
            emit("utilization");
        }
    }
    if (report.contains("validation")) {
        os << "validation,passed," << (report.at("validation").at("passed").get<bool>() ? 1 : 0)
           << "\n";
        os << "validation,recomputed_power,"
           << report.at("validation").at("recomputed_power").dump() << "\n";
    }
    return os.str();
}

}  // namespace eanm
