// Greedy switch-off over an ordered candidate list with pluggable sorting
// and feasibility tests, the per-period decomposition heuristic for
// multi-period instances, and sleeping-weight assignment.
#pragma once

#include <algorithm>
#include <random>
#include <span>
#include <vector>

#include "eanm/formulations.hpp"
#include "eanm/milp.hpp"
#include "eanm/routing.hpp"
#include "eanm/validator.hpp"

namespace eanm {

struct SortPolicy {
    enum Kind { Random, LeastFlowFirst, LeastPowerSavingLast, LeastDegreeFirst };
    Kind kind = LeastFlowFirst;
    uint64_t seed = 0;
    // LeastFlowFirst normally re-sorts after every accepted switch-off; the
    // static variant freezes the initial order.
    bool static_order = false;
};

struct GreedyResult {
    bool feasible_at_start = false;
    Solution solution;
    LoadMap witness;
    double power = 0.0;
    std::vector<double> power_trace;  // after each accepted switch-off
};

namespace detail {

inline Solution states_to_solution(const ActiveMask& mask, const RouteCheck& check,
                                   double power) {
    Solution sol;
    sol.variant = "energy";
    sol.commodities = check.commodity_kind;
    sol.commodity_keys = check.commodity_keys;
    sol.flows = {check.commodity_flows};
    sol.num_periods = 1;
    sol.node_on = {mask.node_on};
    sol.link_state = {mask.link_cards};
    sol.total_power = power;
    return sol;
}

inline double mask_power(const Instance& inst, const ActiveMask& mask, const LoadMap& loads) {
    double watts = 0.0;
    for (size_t a = 0; a < inst.links.size(); ++a) {
        if (mask.link_cards[a] == 0) continue;
        watts += evaluate_power(inst.links[a], loads.arc_load[a], CardCount{mask.link_cards[a]});
    }
    for (size_t i = 0; i < inst.nodes.size(); ++i)
        if (mask.node_on[i]) watts += evaluate_power(inst.nodes[i], loads.node_load[i], true);
    return watts;
}

}  // namespace detail

/// Greedy switch-off: links first (card by card for bundles), then nodes once
/// isolated. A candidate that fails its feasibility test is discarded for
/// good; the scan is a single pass over the ordered list.
inline GreedyResult greedy_sleep(const Instance& inst, const SortPolicy& policy,
                                 const FeasMethod& feasibility, std::span<const double> rates) {
    {
        auto bad = validate_instance(inst);
        if (!bad.empty()) throw Error("invalid instance: " + bad.front());
    }
    Topology topo = make_topology(inst);
    const int A = int(topo.arcs.size());
    const int V = topo.num_nodes;
    GreedyResult out;
    ActiveMask mask = ActiveMask::all_on(inst);
    RouteCheck check = routable(inst, mask, rates, feasibility);
    if (!check.feasible) return out;  // infeasible at the start
    out.feasible_at_start = true;
    out.witness = check.witness;
    RouteCheck last = std::move(check);

    std::mt19937_64 rng(policy.seed);
    auto degree = [&](int node) {
        return int(topo.out_arcs[node].size() + topo.in_arcs[node].size());
    };
    auto order_links = [&](const LoadMap& loads) {
        std::vector<int> order(A);
        for (int a = 0; a < A; ++a) order[a] = a;
        switch (policy.kind) {
            case SortPolicy::Random:
                std::shuffle(order.begin(), order.end(), rng);
                break;
            case SortPolicy::LeastFlowFirst:
                std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
                    return loads.arc_load[x] < loads.arc_load[y];
                });
                break;
            case SortPolicy::LeastPowerSavingLast:
                std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
                    return inst.links[x].fixed_power > inst.links[y].fixed_power;
                });
                break;
            case SortPolicy::LeastDegreeFirst:
                std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
                    int dx = degree(topo.arcs[x].first) + degree(topo.arcs[x].second);
                    int dy = degree(topo.arcs[y].first) + degree(topo.arcs[y].second);
                    return dx < dy;
                });
                break;
        }
        return order;
    };

    double current_power = detail::mask_power(inst, mask, out.witness);
    std::vector<bool> tried(A, false);
    bool adaptive = policy.kind == SortPolicy::LeastFlowFirst && !policy.static_order;
    bool progressed = true;
    while (progressed) {
        progressed = false;
        std::vector<int> order = order_links(out.witness);
        for (int a : order) {
            if (tried[a] || mask.link_cards[a] == 0) continue;
            tried[a] = true;
            // shed cards one at a time; stop at the first infeasible step
            while (mask.link_cards[a] > 0) {
                ActiveMask trial = mask;
                trial.link_cards[a] -= 1;
                RouteCheck rc = routable(inst, trial, rates, feasibility);
                if (!rc.feasible) break;
                mask = trial;
                out.witness = rc.witness;
                last = std::move(rc);
                current_power = detail::mask_power(inst, mask, out.witness);
                out.power_trace.push_back(current_power);
            }
            if (adaptive) {
                progressed = true;  // re-sort against the fresh loads
                break;
            }
        }
        if (!adaptive) break;
        if (std::all_of(tried.begin(), tried.end(), [](bool t) { return t; })) break;
    }

    // Nodes are candidates only once every incident link sleeps.
    std::vector<int> node_order(V);
    for (int i = 0; i < V; ++i) node_order[i] = i;
    switch (policy.kind) {
        case SortPolicy::Random:
            std::shuffle(node_order.begin(), node_order.end(), rng);
            break;
        case SortPolicy::LeastFlowFirst:
            std::stable_sort(node_order.begin(), node_order.end(), [&](int x, int y) {
                return out.witness.node_load[x] < out.witness.node_load[y];
            });
            break;
        case SortPolicy::LeastPowerSavingLast:
            std::stable_sort(node_order.begin(), node_order.end(), [&](int x, int y) {
                return inst.nodes[x].fixed_power > inst.nodes[y].fixed_power;
            });
            break;
        case SortPolicy::LeastDegreeFirst:
            std::stable_sort(node_order.begin(), node_order.end(), [&](int x, int y) {
                return degree(x) < degree(y);
            });
            break;
    }
    for (int i : node_order) {
        if (!mask.node_on[i]) continue;
        bool isolated = true;
        for (int a : topo.out_arcs[i])
            if (mask.link_cards[a] > 0) isolated = false;
        for (int a : topo.in_arcs[i])
            if (mask.link_cards[a] > 0) isolated = false;
        if (!isolated) continue;
        ActiveMask trial = mask;
        trial.node_on[i] = false;
        RouteCheck rc = routable(inst, trial, rates, feasibility);
        if (!rc.feasible) continue;
        mask = trial;
        out.witness = rc.witness;
        last = std::move(rc);
        current_power = detail::mask_power(inst, mask, out.witness);
        out.power_trace.push_back(current_power);
    }

    out.power = current_power;
    out.solution = detail::states_to_solution(mask, last, out.power);
    return out;
}

// ---------------------------------------------------------------------------
// multiperiod_sequential
// ---------------------------------------------------------------------------

struct PerPeriodMethod {
    enum Kind { Milp, Greedy } kind = Milp;
    SortPolicy policy;      // Greedy only
    FeasMethod feasibility; // Greedy only
};

enum class PeriodOrder { Chronological, AscendingLoad };

struct SequentialResult {
    bool feasible = true;
    Solution solution;
    double power = 0.0;     // per-period power plus reactivation charges
    int pinned_links = 0;   // links forced on to honor the reactivation cap
};

/// Solves each period on its own, then charges reactivations and, when the
/// per-card budget is violated, pins the worst link fully on and re-solves.
inline SequentialResult multiperiod_sequential(const Instance& inst, const PerPeriodMethod& method,
                                               PeriodOrder order = PeriodOrder::Chronological) {
    if (!inst.multi_period()) throw Error("multiperiod_sequential needs instance.periods");
    Topology topo = make_topology(inst);
    const int S = int(inst.periods.size());
    const int A = int(topo.arcs.size());
    SequentialResult out;
    out.solution.variant = "multiperiod";
    out.solution.num_periods = S;
    out.solution.node_on.assign(S, std::vector<bool>(inst.nodes.size(), true));
    out.solution.link_state.assign(S, std::vector<int>(A, 0));
    out.solution.flows.assign(S, {});
    auto commodity_slot = [&](CommodityKind kind, const std::string& key) {
        out.solution.commodities = kind;
        for (size_t k = 0; k < out.solution.commodity_keys.size(); ++k)
            if (out.solution.commodity_keys[k] == key) return int(k);
        out.solution.commodity_keys.push_back(key);
        for (auto& period : out.solution.flows)
            period.resize(out.solution.commodity_keys.size(), std::vector<double>(A, 0.0));
        return int(out.solution.commodity_keys.size()) - 1;
    };

    std::vector<int> sequence(S);
    for (int s = 0; s < S; ++s) sequence[s] = s;
    if (order == PeriodOrder::AscendingLoad) {
        std::vector<double> volume(S, 0.0);
        for (int s = 0; s < S; ++s)
            for (const Demand& d : inst.demands) volume[s] += demand_rate(inst, d, s);
        std::stable_sort(sequence.begin(), sequence.end(),
                         [&](int x, int y) { return volume[x] < volume[y]; });
    }

    std::vector<bool> pinned(A, false);
    for (int attempt = 0; attempt <= A; ++attempt) {
        for (int s : sequence) {
            Instance single = inst;
            single.periods.clear();
            for (size_t d = 0; d < single.demands.size(); ++d)
                single.demands[d].rate = demand_rate(inst, inst.demands[d], s);

            if (method.kind == PerPeriodMethod::Milp) {
                BuildResult b = build_energy_model(single, RoutingScheme::per_flow(), {});
                for (int a = 0; a < A; ++a)
                    if (pinned[a]) {
                        int j = b.model.lp.variable_index(
                            b.symbols.column("w", arc_key(inst.links[a])));
                        b.model.lp.variables[j].lower = b.model.lp.variables[j].upper;
                    }
                MilpSolution ms = solve_milp(b.model);
                if (ms.status != MilpStatus::Optimal) {
                    out.feasible = false;
                    return out;
                }
                VariantSpec v;
                v.id = "energy";
                Solution ss = extract_solution(single, v, b, ms.values);
                out.solution.node_on[s] = ss.node_on[0];
                out.solution.link_state[s] = ss.link_state[0];
                out.solution.flows[s].assign(out.solution.commodity_keys.size(),
                                             std::vector<double>(A, 0.0));
                for (size_t k = 0; k < ss.commodity_keys.size(); ++k) {
                    int slot = commodity_slot(ss.commodities, ss.commodity_keys[k]);
                    out.solution.flows[s][slot] = ss.flows[0][k];
                }
            } else {
                std::vector<double> rates;
                for (const Demand& d : single.demands) rates.push_back(d.rate);
                GreedyResult gr = greedy_sleep(single, method.policy, method.feasibility, rates);
                if (!gr.feasible_at_start) {
                    out.feasible = false;
                    return out;
                }
                for (int a = 0; a < A; ++a)
                    if (pinned[a]) gr.solution.link_state[0][a] = inst.links[a].num_cards;
                out.solution.node_on[s] = gr.solution.node_on[0];
                out.solution.link_state[s] = gr.solution.link_state[0];
                out.solution.flows[s].assign(out.solution.commodity_keys.size(),
                                             std::vector<double>(A, 0.0));
                for (size_t k = 0; k < gr.solution.commodity_keys.size(); ++k) {
                    int slot = commodity_slot(gr.solution.commodities,
                                              gr.solution.commodity_keys[k]);
                    out.solution.flows[s][slot] = gr.solution.flows[0][k];
                }
            }
        }
        // check the per-card reactivation budget; pin the worst offender
        int worst = -1;
        double worst_excess = 0.0;
        for (int a = 0; a < A; ++a) {
            double total = 0.0;
            for (int s = 0; s < S; ++s) {
                int prev = (s + S - 1) % S;
                int delta = out.solution.link_state[s][a] - out.solution.link_state[prev][a];
                if (delta > 0) total += delta;
            }
            double budget = double(inst.links[a].num_cards) * inst.max_reactivations;
            if (total > budget && total - budget > worst_excess) {
                worst_excess = total - budget;
                worst = a;
            }
        }
        if (worst < 0) break;
        pinned[worst] = true;
        ++out.pinned_links;
    }

    // pinned links stay on in every period
    for (int a = 0; a < A; ++a)
        if (pinned[a])
            for (int s = 0; s < S; ++s)
                out.solution.link_state[s][a] = inst.links[a].num_cards;
    // coherence for pinned links
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            if (out.solution.link_state[s][a] > 0) {
                out.solution.node_on[s][topo.arcs[a].first] = true;
                out.solution.node_on[s][topo.arcs[a].second] = true;
            }
    out.power = recompute_power(inst, out.solution);
    out.solution.total_power = out.power;
    return out;
}

// ---------------------------------------------------------------------------
// assign_sleeping_weights
// ---------------------------------------------------------------------------

inline WeightSet assign_sleeping_weights(const WeightSet& weights, const Instance& inst,
                                         const std::vector<int>& link_state) {
    if (weights.omega.size() != inst.links.size() || link_state.size() != inst.links.size())
        throw Error("assign_sleeping_weights: size mismatch");
    WeightSet out = weights;
    for (size_t a = 0; a < out.omega.size(); ++a) {
        if (link_state[a] == 0) out.omega[a] = inst.omega_max;
        out.omega[a] = std::min(std::max(out.omega[a], 1.0), inst.omega_max);
    }
    return out;
}

}  // namespace eanm
