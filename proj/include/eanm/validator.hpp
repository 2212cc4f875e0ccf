// Re-checks a Solution against the instance from first principles: every
// constraint family is evaluated from raw states and flows, never through the
// model builders, so agreement between the two is meaningful evidence.
#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "eanm/model.hpp"
#include "eanm/routing.hpp"
#include "eanm/solution.hpp"

namespace eanm {

struct FamilyResult {
    std::string family;
    bool pass = true;
    double worst_violation = 0.0;
    std::string offender;
};

struct ValidationReport {
    std::vector<FamilyResult> families;
    double recomputed_power = 0.0;

    bool passed() const {
        for (const FamilyResult& f : families)
            if (!f.pass) return false;
        return true;
    }

    const FamilyResult* family(const std::string& name) const {
        for (const FamilyResult& f : families)
            if (f.family == name) return &f;
        return nullptr;
    }
};

namespace detail {

struct Checker {
    FamilyResult result;

    explicit Checker(std::string name) { result.family = std::move(name); }

    void violation(double magnitude, const std::string& where) {
        if (magnitude <= 0.0) return;
        result.pass = false;
        if (magnitude > result.worst_violation) {
            result.worst_violation = magnitude;
            result.offender = where;
        }
    }
};

struct SolutionLoads {
    std::vector<double> primary_arc;   // traffic actually flowing
    std::vector<double> reserved_arc;  // bandwidth to dimension devices for
    std::vector<double> node;          // entering + originated
};

inline double rate_in_period(const Instance& inst, int d, int sigma) {
    return inst.multi_period() ? demand_rate(inst, inst.demands[d], sigma)
                               : inst.demands[d].rate;
}

inline SolutionLoads solution_loads(const Instance& inst, const Topology& topo,
                                    const Solution& sol, int sigma) {
    const int A = int(topo.arcs.size());
    SolutionLoads out;
    out.primary_arc.assign(A, 0.0);
    out.reserved_arc.assign(A, 0.0);
    out.node.assign(topo.num_nodes, 0.0);
    if (!sol.flows.empty() && sigma < int(sol.flows.size())) {
        for (const auto& commodity : sol.flows[sigma])
            for (int a = 0; a < A; ++a) out.primary_arc[a] += commodity[a];
        out.reserved_arc = out.primary_arc;
    } else if (!sol.primary.empty()) {
        for (size_t d = 0; d < sol.primary[sigma].size(); ++d) {
            double r = rate_in_period(inst, int(d), sigma);
            for (int a : sol.primary[sigma][d]) {
                out.primary_arc[a] += r;
                out.reserved_arc[a] += r;
            }
        }
        if (sol.has_protection && !sol.backup.empty()) {
            if (!sol.shared_backup) {
                for (size_t d = 0; d < sol.backup[sigma].size(); ++d) {
                    double r = rate_in_period(inst, int(d), sigma);
                    for (int a : sol.backup[sigma][d]) out.reserved_arc[a] += r;
                }
            } else {
                // worst single failure sizes each arc
                for (int a = 0; a < A; ++a) {
                    double worst = 0.0;
                    for (int k = 0; k < A; ++k) {
                        if (k == a) continue;
                        double rerouted = 0.0;
                        for (size_t d = 0; d < sol.primary[sigma].size(); ++d) {
                            bool primary_hits = false, backup_uses = false;
                            for (int pa : sol.primary[sigma][d])
                                if (pa == k) primary_hits = true;
                            for (int ba : sol.backup[sigma][d])
                                if (ba == a) backup_uses = true;
                            if (primary_hits && backup_uses)
                                rerouted += rate_in_period(inst, int(d), sigma);
                        }
                        worst = std::max(worst, rerouted);
                    }
                    out.reserved_arc[a] += worst;
                }
            }
        }
    }
    const auto& arc_for_node = sol.smart ? out.primary_arc : out.reserved_arc;
    for (int i = 0; i < topo.num_nodes; ++i)
        for (int a : topo.in_arcs[i]) out.node[i] += arc_for_node[a];
    for (size_t d = 0; d < inst.demands.size(); ++d)
        out.node[topo.node(inst.demands[d].origin)] += rate_in_period(inst, int(d), sigma);
    return out;
}

inline double active_capacity(const Instance& inst, const Solution& sol, int sigma, int a,
                              bool physical) {
    const LinkSpec& l = inst.links[a];
    if (sol.alr) {
        int e = physical ? int(l.rate_configs.size()) - 1 : sol.link_state[sigma][a];
        return l.max_utilization * l.rate_configs[e].capacity;
    }
    int cards = physical ? l.num_cards : sol.link_state[sigma][a];
    return l.max_utilization * l.card_capacity * cards;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// recompute_power
// ---------------------------------------------------------------------------

inline double recompute_power(const Instance& inst, const Solution& sol) {
    Topology topo = make_topology(inst);
    double watts = 0.0;
    for (int sigma = 0; sigma < sol.num_periods; ++sigma) {
        detail::SolutionLoads loads = detail::solution_loads(inst, topo, sol, sigma);
        for (size_t a = 0; a < inst.links.size(); ++a) {
            double load = sol.smart ? loads.primary_arc[a] : loads.reserved_arc[a];
            int state = sol.link_state[sigma][a];
            if (state == 0 && load > 1e-9)
                throw Error("inconsistent state: arc " + arc_key(inst.links[a]) +
                            " carries load while asleep");
            if (state == 0) continue;
            watts += sol.alr ? evaluate_power(inst.links[a], load, ConfigIndex{state})
                             : evaluate_power(inst.links[a], load, CardCount{state});
        }
        for (int i = 0; i < topo.num_nodes; ++i) {
            if (!sol.node_on[sigma][i]) continue;
            // protection models dimension nodes by fixed power only
            double load = sol.has_protection ? 0.0 : loads.node[i];
            watts += evaluate_power(inst.nodes[i], load, true);
        }
    }
    if (sol.num_periods > 1 && inst.reactivation_fraction > 0.0) {
        int S = sol.num_periods;
        for (int i = 0; i < topo.num_nodes; ++i) {
            for (int sigma = 0; sigma < S; ++sigma) {
                int prev = (sigma + S - 1) % S;
                if (sol.node_on[sigma][i] && !sol.node_on[prev][i])
                    watts += inst.reactivation_fraction * inst.nodes[i].fixed_power;
            }
        }
    }
    return watts;
}

// ---------------------------------------------------------------------------
// validate_solution
// ---------------------------------------------------------------------------

inline ValidationReport validate_solution(const Instance& inst, const Solution& sol,
                                          double tol = 1e-6) {
    Topology topo = make_topology(inst);
    const int A = int(topo.arcs.size());
    const int V = topo.num_nodes;
    if (int(sol.node_on.size()) != sol.num_periods ||
        int(sol.link_state.size()) != sol.num_periods)
        throw Error("solution period tables do not match num_periods");
    if (inst.multi_period() && sol.num_periods != int(inst.periods.size()))
        throw Error("solution periods do not match the instance");
    if (!inst.multi_period() && sol.num_periods != 1)
        throw Error("multi-period solution for a single-period instance");
    ValidationReport report;

    // conservation --------------------------------------------------------
    {
        detail::Checker c("conservation");
        for (int sigma = 0; sigma < sol.num_periods; ++sigma) {
            if (!sol.flows.empty()) {
                for (size_t k = 0; k < sol.commodity_keys.size(); ++k) {
                    const std::string& key = sol.commodity_keys[k];
                    const std::vector<double>& fl = sol.flows[sigma][k];
                    std::vector<double> net(V, 0.0);
                    for (int a = 0; a < A; ++a) {
                        net[topo.arcs[a].first] += fl[a];
                        net[topo.arcs[a].second] -= fl[a];
                    }
                    std::vector<double> want(V, 0.0);
                    if (sol.commodities == CommodityKind::PerDemand) {
                        int d = std::stoi(key.substr(1));
                        double r = detail::rate_in_period(inst, d, sigma);
                        want[topo.node(inst.demands[d].origin)] += r;
                        want[topo.node(inst.demands[d].destination)] -= r;
                    } else if (sol.commodities == CommodityKind::PerSource) {
                        std::string src = key.substr(2);
                        for (size_t d = 0; d < inst.demands.size(); ++d) {
                            if (inst.demands[d].origin != src) continue;
                            double r = detail::rate_in_period(inst, int(d), sigma);
                            want[topo.node(src)] += r;
                            want[topo.node(inst.demands[d].destination)] -= r;
                        }
                    } else {
                        std::string dst = key.substr(2);
                        for (size_t d = 0; d < inst.demands.size(); ++d) {
                            if (inst.demands[d].destination != dst) continue;
                            double r = detail::rate_in_period(inst, int(d), sigma);
                            want[topo.node(inst.demands[d].origin)] += r;
                            want[topo.node(dst)] -= r;
                        }
                    }
                    for (int i = 0; i < V; ++i) {
                        double err = std::fabs(net[i] - want[i]);
                        if (err > tol) c.violation(err, key + " at " + inst.nodes[i].id);
                    }
                }
            }
            auto check_path = [&](const std::vector<int>& path, int d, const char* what) {
                int at = topo.node(inst.demands[d].origin);
                std::set<int> seen{at};
                for (int a : path) {
                    if (a < 0 || a >= A || topo.arcs[a].first != at) {
                        c.violation(1.0, std::string(what) + " of demand " + std::to_string(d) +
                                             ": broken arc sequence");
                        return;
                    }
                    at = topo.arcs[a].second;
                    if (!seen.insert(at).second) {
                        c.violation(1.0, std::string(what) + " of demand " + std::to_string(d) +
                                             ": revisits a node");
                        return;
                    }
                }
                if (at != topo.node(inst.demands[d].destination))
                    c.violation(1.0, std::string(what) + " of demand " + std::to_string(d) +
                                         ": does not reach the destination");
            };
            if (!sol.primary.empty())
                for (size_t d = 0; d < sol.primary[sigma].size(); ++d)
                    check_path(sol.primary[sigma][d], int(d), "primary");
            if (sol.has_protection && !sol.backup.empty())
                for (size_t d = 0; d < sol.backup[sigma].size(); ++d)
                    check_path(sol.backup[sigma][d], int(d), "backup");
        }
        report.families.push_back(c.result);
    }

    // capacity / utilization threshold -------------------------------------
    {
        detail::Checker c("capacity");
        for (int sigma = 0; sigma < sol.num_periods; ++sigma) {
            detail::SolutionLoads loads = detail::solution_loads(inst, topo, sol, sigma);
            for (int a = 0; a < A; ++a) {
                double cap = detail::active_capacity(inst, sol, sigma, a, sol.smart);
                // shared backups are dimensioned per failure scenario below;
                // everything else must hold its full reservation at once
                double load = sol.shared_backup ? loads.primary_arc[a] : loads.reserved_arc[a];
                if (load > cap + tol)
                    c.violation(load - cap, arc_key(inst.links[a]) +
                                                (inst.multi_period()
                                                     ? "@" + inst.periods[sigma]
                                                     : ""));
            }
        }
        report.families.push_back(c.result);
    }

    // coherence -------------------------------------------------------------
    {
        detail::Checker c("coherence");
        for (int sigma = 0; sigma < sol.num_periods; ++sigma) {
            for (int a = 0; a < A; ++a) {
                bool link_active = sol.alr
                                       ? inst.links[a]
                                                 .rate_configs[sol.link_state[sigma][a]]
                                                 .capacity > 0.0
                                       : sol.link_state[sigma][a] > 0;
                if (!link_active) continue;
                auto [u, v] = topo.arcs[a];
                if (!sol.node_on[sigma][u])
                    c.violation(1.0, arc_key(inst.links[a]) + " active with " +
                                         inst.nodes[u].id + " asleep");
                if (!sol.node_on[sigma][v])
                    c.violation(1.0, arc_key(inst.links[a]) + " active with " +
                                         inst.nodes[v].id + " asleep");
            }
        }
        report.families.push_back(c.result);
    }

    // protection families ----------------------------------------------------
    if (sol.has_protection) {
        detail::Checker disj("disjointness");
        for (int sigma = 0; sigma < sol.num_periods; ++sigma) {
            for (size_t d = 0; d < sol.primary[sigma].size(); ++d) {
                std::set<std::pair<int, int>> primary_pairs;
                for (int a : sol.primary[sigma][d]) primary_pairs.insert(topo.arcs[a]);
                for (int a : sol.backup[sigma][d]) {
                    auto [u, v] = topo.arcs[a];
                    if (primary_pairs.count({u, v}) || primary_pairs.count({v, u}))
                        disj.violation(1.0, "demand " + std::to_string(d) + " shares " +
                                                arc_key(inst.links[a]));
                }
            }
        }
        report.families.push_back(disj.result);

        detail::Checker pc("protection_capacity");
        for (int sigma = 0; sigma < sol.num_periods; ++sigma) {
            // per failure scenario: surviving primaries plus activated backups
            for (int k = 0; k < A; ++k) {
                std::vector<double> load(A, 0.0);
                for (size_t d = 0; d < sol.primary[sigma].size(); ++d) {
                    double r = detail::rate_in_period(inst, int(d), sigma);
                    bool hit = false;
                    for (int a : sol.primary[sigma][d])
                        if (a == k) hit = true;
                    const auto& path = hit ? sol.backup[sigma][d] : sol.primary[sigma][d];
                    for (int a : path) load[a] += r;
                }
                for (int a = 0; a < A; ++a) {
                    if (a == k) continue;
                    double cap = detail::active_capacity(inst, sol, sigma, a, sol.smart);
                    if (load[a] > cap + tol)
                        pc.violation(load[a] - cap, "failure of " + arc_key(inst.links[k]) +
                                                        " overloads " + arc_key(inst.links[a]));
                }
            }
        }
        report.families.push_back(pc.result);
    }

    // switching caps ----------------------------------------------------------
    if (sol.num_periods > 1) {
        detail::Checker c("switching");
        int S = sol.num_periods;
        for (int a = 0; a < A; ++a) {
            int n = inst.links[a].num_cards;
            double total = 0.0;
            for (int sigma = 0; sigma < S; ++sigma) {
                int prev = (sigma + S - 1) % S;
                int delta = sol.link_state[sigma][a] - sol.link_state[prev][a];
                if (delta > n)
                    c.violation(delta - n, arc_key(inst.links[a]) + " wakes more cards than exist");
                if (delta > 0) total += delta;
            }
            double budget = double(n) * inst.max_reactivations;
            if (total > budget + tol)
                c.violation(total - budget, arc_key(inst.links[a]) + " reactivation budget");
        }
        report.families.push_back(c.result);
    }

    // ECMP consistency and weight domain ---------------------------------------
    if (sol.weights) {
        detail::Checker wd("weight_domain");
        for (int a = 0; a < A; ++a) {
            double w = (*sol.weights)[a];
            if (w < 1.0 - tol) wd.violation(1.0 - w, arc_key(inst.links[a]) + " below 1");
            if (w > inst.omega_max + tol)
                wd.violation(w - inst.omega_max, arc_key(inst.links[a]) + " above omega_max");
            if (sol.link_state[0][a] == 0 && std::fabs(w - inst.omega_max) > tol)
                wd.violation(std::fabs(w - inst.omega_max),
                             arc_key(inst.links[a]) + " sleeping but not at omega_max");
        }
        report.families.push_back(wd.result);

        detail::Checker ec("ecmp_consistency");
        ActiveMask mask;
        mask.node_on = sol.node_on[0];
        mask.link_cards = sol.link_state[0];
        std::vector<double> rates;
        for (size_t d = 0; d < inst.demands.size(); ++d)
            rates.push_back(detail::rate_in_period(inst, int(d), 0));
        try {
            LoadMap lm = compute_ecmp_loads(inst, {*sol.weights}, mask, rates, tol);
            detail::SolutionLoads loads = detail::solution_loads(inst, topo, sol, 0);
            for (int a = 0; a < A; ++a) {
                double diff = std::fabs(lm.arc_load[a] - loads.primary_arc[a]);
                if (diff > tol)
                    ec.violation(diff, arc_key(inst.links[a]) + " propagated load differs");
                if (sol.link_state[0][a] == 0 && lm.arc_load[a] > tol)
                    ec.violation(lm.arc_load[a], arc_key(inst.links[a]) + " sleeping but loaded");
            }
        } catch (const Error& e) {
            ec.violation(1.0, e.what());
        }
        report.families.push_back(ec.result);
    }

    // power ---------------------------------------------------------------------
    {
        detail::Checker c("power");
        try {
            report.recomputed_power = recompute_power(inst, sol);
            double diff = std::fabs(report.recomputed_power - sol.total_power);
            if (diff > std::max(tol, 1e-6 * std::fabs(report.recomputed_power)))
                c.violation(diff, "reported power differs from recomputed");
        } catch (const Error& e) {
            c.violation(1.0, e.what());
        }
        report.families.push_back(c.result);
    }
    return report;
}

}  // namespace eanm
