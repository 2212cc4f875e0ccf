// Branch-and-bound over the LP core. Best-bound node selection with a
// depth-first tie break, most-fractional branching, and a monotone global
// bound. No cuts, no diving heuristics.
#pragma once

#include <chrono>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "eanm/lp.hpp"

namespace eanm {

enum class IntegerKind { Binary, General };

struct MilpModel {
    LinearProgram lp;
    std::map<std::string, IntegerKind> integrality;

    std::vector<std::string> check() const {
        std::vector<std::string> bad = lp.check();
        for (const auto& [name, kind] : integrality) {
            int j = lp.variable_index(name);
            if (j < 0) {
                bad.push_back("integrality references unknown variable " + name);
                continue;
            }
            const LpVariable& v = lp.variables[j];
            if (kind == IntegerKind::Binary && (v.lower < -1e-9 || v.upper > 1.0 + 1e-9))
                bad.push_back("binary variable " + name + " has bounds outside [0,1]");
            if (kind == IntegerKind::General && (!std::isfinite(v.lower) || !std::isfinite(v.upper)))
                bad.push_back("integer variable " + name + " needs finite bounds");
        }
        return bad;
    }
};

enum class MilpStatus { Optimal, Feasible, Infeasible, LimitReached, SolverFailure };

inline const char* to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::Optimal: return "optimal";
        case MilpStatus::Feasible: return "feasible";
        case MilpStatus::Infeasible: return "infeasible";
        case MilpStatus::LimitReached: return "limit-reached";
        case MilpStatus::SolverFailure: return "solver-failure";
    }
    return "?";
}

struct MilpLimits {
    long node_cap = 200000;
    double time_cap_s = 300.0;
    double gap_target = 0.0;  // absolute gap at which the search may stop
};

struct MilpSolution {
    MilpStatus status = MilpStatus::SolverFailure;
    std::vector<double> values;
    double objective = kInf;
    double best_bound = -kInf;
    double root_objective = kInf;  // LP relaxation value at the root
    long nodes = 0;
    std::vector<double> bound_trace;  // global bound after each processed node
    std::string detail;

    double value_of(const MilpModel& m, const std::string& name) const {
        int j = m.lp.variable_index(name);
        if (j < 0 || j >= static_cast<int>(values.size()))
            throw Error("no value for variable " + name);
        return values[j];
    }
};

struct MilpTolerances {
    double integrality = 1e-6;
    double lp = 1e-7;
};

namespace detail {

struct BnbNode {
    double bound;
    int depth;
    long id;
    // bound changes relative to the root model, applied in order
    std::vector<std::tuple<int, double, double>> changes;
};

struct NodeOrder {
    bool operator()(const BnbNode& a, const BnbNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // smaller bound first
        if (a.depth != b.depth) return a.depth < b.depth;  // deeper first
        return a.id > b.id;
    }
};

}  // namespace detail

inline MilpSolution solve_milp(const MilpModel& model, MilpLimits limits = {},
                               MilpTolerances tol = {}) {
    MilpSolution out;
    {
        auto bad = model.check();
        if (!bad.empty()) throw Error("malformed MILP: " + bad.front());
    }
    std::vector<int> int_vars;
    for (const auto& [name, kind] : model.integrality)
        int_vars.push_back(model.lp.variable_index(name));
    std::sort(int_vars.begin(), int_vars.end());

    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    LinearProgram work = model.lp;
    std::priority_queue<detail::BnbNode, std::vector<detail::BnbNode>, detail::NodeOrder> open;
    open.push({-kInf, 0, 0, {}});
    long next_id = 1;
    bool have_incumbent = false;
    std::vector<double> incumbent;
    double incumbent_obj = kInf;
    double last_bound = -kInf;
    bool hit_limit = false;
    std::string limit_what;

    while (!open.empty()) {
        if (out.nodes >= limits.node_cap) {
            hit_limit = true;
            limit_what = "node cap";
            break;
        }
        if (elapsed() > limits.time_cap_s) {
            hit_limit = true;
            limit_what = "time cap";
            break;
        }
        detail::BnbNode node = open.top();
        open.pop();
        double global_bound = have_incumbent ? std::min(node.bound, incumbent_obj) : node.bound;
        if (std::isfinite(global_bound)) {
            last_bound = std::max(last_bound, global_bound);
            out.bound_trace.push_back(last_bound);
        }
        if (have_incumbent && node.bound >= incumbent_obj - 1e-9) continue;  // pruned
        if (have_incumbent && limits.gap_target > 0.0 &&
            incumbent_obj - node.bound <= limits.gap_target) {
            // Proven within the requested gap; stop early.
            out.values = std::move(incumbent);
            out.objective = incumbent_obj;
            out.best_bound = node.bound;
            out.status = MilpStatus::Feasible;
            return out;
        }

        // Rebuild this node's bounds from the root model.
        for (int j = 0; j < static_cast<int>(work.variables.size()); ++j) {
            work.variables[j].lower = model.lp.variables[j].lower;
            work.variables[j].upper = model.lp.variables[j].upper;
        }
        for (auto& [j, lb, ub] : node.changes) {
            work.variables[j].lower = std::max(work.variables[j].lower, lb);
            work.variables[j].upper = std::min(work.variables[j].upper, ub);
        }
        ++out.nodes;
        LpSolution rel = solve_lp(work, tol.lp);
        if (node.depth == 0) out.root_objective = rel.status == LpStatus::Optimal
                                                      ? rel.objective
                                                      : (rel.status == LpStatus::Infeasible ? kInf : -kInf);
        if (rel.status == LpStatus::SolverFailure) {
            out.status = MilpStatus::SolverFailure;
            out.detail = "relaxation failed at node " + std::to_string(node.id) + " (depth " +
                         std::to_string(node.depth) + "): " + rel.detail;
            return out;
        }
        if (rel.status == LpStatus::Infeasible) continue;
        if (rel.status == LpStatus::Unbounded) {
            out.status = MilpStatus::SolverFailure;
            out.detail = "unbounded relaxation at node " + std::to_string(node.id);
            return out;
        }
        if (have_incumbent && rel.objective >= incumbent_obj - 1e-9) continue;

        // Most-fractional branching variable, lowest index on ties.
        int branch = -1;
        double best_frac = tol.integrality;
        for (int j : int_vars) {
            double v = rel.values[j];
            double frac = std::fabs(v - std::round(v));
            if (frac > best_frac + 1e-12) {
                best_frac = frac;
                branch = j;
            }
        }
        if (branch < 0) {
            // Integral: new incumbent.
            std::vector<double> snapped = rel.values;
            for (int j : int_vars) snapped[j] = std::round(snapped[j]);
            double obj = 0.0;
            for (size_t j = 0; j < snapped.size(); ++j)
                obj += model.lp.variables[j].objective * snapped[j];
            if (!have_incumbent || obj < incumbent_obj) {
                have_incumbent = true;
                incumbent_obj = obj;
                incumbent = std::move(snapped);
            }
            continue;
        }
        double v = rel.values[branch];
        detail::BnbNode down{rel.objective, node.depth + 1, next_id++, node.changes};
        down.changes.emplace_back(branch, -kInf, std::floor(v));
        detail::BnbNode up{rel.objective, node.depth + 1, next_id++, node.changes};
        up.changes.emplace_back(branch, std::ceil(v), kInf);
        open.push(std::move(down));
        open.push(std::move(up));
    }

    if (hit_limit) {
        out.status = MilpStatus::LimitReached;
        out.detail = limit_what;
        out.best_bound = open.empty() ? incumbent_obj
                                      : std::max(last_bound, std::min(open.top().bound, incumbent_obj));
        if (have_incumbent) {
            out.values = std::move(incumbent);
            out.objective = incumbent_obj;
        }
        return out;
    }
    if (!have_incumbent) {
        out.status = MilpStatus::Infeasible;
        out.best_bound = kInf;
        return out;
    }
    out.values = std::move(incumbent);
    out.objective = incumbent_obj;
    out.best_bound = incumbent_obj;
    out.status = MilpStatus::Optimal;
    return out;
}

}  // namespace eanm
