// Exhaustive ground truth for tiny instances: enumerate device-state vectors
// (or path pairs for protection) and keep the cheapest one that routes. The
// only LP it touches is the plain per-source routing LP, so its answers are
// independent of the model builders it certifies.
#pragma once

#include <chrono>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "eanm/formulations.hpp"  // option types only (ProtectionMode, EnergyOptions)
#include "eanm/routing.hpp"
#include "eanm/solution.hpp"

namespace eanm {

struct OracleLimits {
    long long max_states = 1LL << 20;
    double time_cap_s = 120.0;
};

struct OracleSelector {
    enum Family { Energy, Protection, Multiperiod } family = Energy;
    EnergyOptions energy;          // Energy / Multiperiod
    ProtectionMode protection = ProtectionMode::None;
};

enum class OracleStatus { Solved, Infeasible, LimitExceeded };

struct OracleOutcome {
    OracleStatus status = OracleStatus::Infeasible;
    Solution best;
    double power = kInf;
    long long states_required = 0;
    long long states_examined = 0;
};

namespace detail {

inline void require_linear_costs(const Instance& inst) {
    for (const NodeSpec& n : inst.nodes)
        if (!n.piecewise.empty())
            throw Error("oracle supports linear load costs only (node " + n.id + ")");
    for (const LinkSpec& l : inst.links)
        if (!l.piecewise.empty())
            throw Error("oracle supports linear load costs only (link " + arc_key(l) + ")");
}

// Arc indices in (from, to) order: the enumeration ticks the last arc fastest,
// which makes the first-found optimum the lexicographic tie-winner.
inline std::vector<int> lexicographic_arcs(const Instance& inst) {
    std::vector<int> order(inst.links.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const LinkSpec& x = inst.links[a];
        const LinkSpec& y = inst.links[b];
        return std::tie(x.from, x.to) < std::tie(y.from, y.to);
    });
    return order;
}

inline long long saturating_mul(long long a, long long b) {
    if (a <= 0 || b <= 0) return 0;
    __int128 r = static_cast<__int128>(a) * b;
    const long long cap = 1LL << 62;
    return r > cap ? cap : static_cast<long long>(r);
}

struct EnergyStateEval {
    bool feasible = false;
    double power = 0.0;
    CommodityKind kind = CommodityKind::PerSource;
    std::vector<std::string> keys;
    std::vector<std::vector<double>> flows;
    std::vector<bool> node_on;
};

// Fixed power of the link states plus the minimum load-proportional routing
// cost; nodes wake only where an active arc demands it.
inline EnergyStateEval evaluate_energy_state(const Instance& inst, const Topology& topo,
                                             const OracleSelector& sel,
                                             const std::vector<int>& link_state,
                                             std::span<const double> rates,
                                             double prune_at = kInf) {
    EnergyStateEval ev;
    const int A = int(topo.arcs.size());
    ActiveMask mask;
    mask.link_cards.assign(A, 0);
    mask.node_on.assign(topo.num_nodes, false);
    double fixed = 0.0;
    for (int a = 0; a < A; ++a) {
        const LinkSpec& l = inst.links[a];
        if (sel.energy.alr) {
            const RateConfig& rc = l.rate_configs[link_state[a]];
            fixed += rc.power;
            mask.link_cards[a] = link_state[a];
            if (rc.capacity > 0.0) {
                mask.node_on[topo.arcs[a].first] = true;
                mask.node_on[topo.arcs[a].second] = true;
            }
        } else {
            fixed += l.fixed_power * link_state[a];
            mask.link_cards[a] = link_state[a];
            if (link_state[a] > 0) {
                mask.node_on[topo.arcs[a].first] = true;
                mask.node_on[topo.arcs[a].second] = true;
            }
        }
    }
    for (int i = 0; i < topo.num_nodes; ++i)
        if (mask.node_on[i]) fixed += inst.nodes[i].fixed_power;
    ev.node_on.assign(mask.node_on.begin(), mask.node_on.end());
    ev.power = fixed;
    if (fixed >= prune_at - 1e-9) return ev;  // load costs cannot lower it

    // quick reachability screen before paying for an LP
    for (size_t d = 0; d < inst.demands.size(); ++d) {
        if (rates[d] <= 0.0) continue;
        int o = topo.node(inst.demands[d].origin);
        int t = topo.node(inst.demands[d].destination);
        std::vector<bool> seen(topo.num_nodes, false);
        std::vector<int> stack{o};
        seen[o] = true;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int a : topo.out_arcs[v]) {
                if (!mask.arc_active(topo, a)) continue;
                int w = topo.arcs[a].second;
                if (!seen[w]) {
                    seen[w] = true;
                    stack.push_back(w);
                }
            }
        }
        if (!seen[t]) return ev;
    }
    LinearProgram lp;
    RoutingLpCols cols;
    LpSolution sol = routing_lp(inst, topo, mask, rates, true, &lp, &cols);
    if (sol.status != LpStatus::Optimal) return ev;
    ev.feasible = true;
    ev.power = fixed + sol.objective;
    for (size_t s = 0; s < cols.sources.size(); ++s) {
        ev.keys.push_back("s:" + cols.sources[s]);
        std::vector<double> flow(A, 0.0);
        for (int a = 0; a < A; ++a)
            if (cols.var[s][a] >= 0) flow[a] = sol.values[cols.var[s][a]];
        ev.flows.push_back(std::move(flow));
    }
    return ev;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// brute_force_optimum
// ---------------------------------------------------------------------------

inline OracleOutcome brute_force_optimum(const Instance& inst, const OracleSelector& sel,
                                         const OracleLimits& limits = {}) {
    {
        auto bad = validate_instance(inst);
        if (!bad.empty()) throw Error("invalid instance: " + bad.front());
    }
    detail::require_linear_costs(inst);
    Topology topo = make_topology(inst);
    const int A = int(topo.arcs.size());
    const int V = topo.num_nodes;
    auto t0 = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
               limits.time_cap_s;
    };
    OracleOutcome out;

    std::vector<int> order = detail::lexicographic_arcs(inst);
    auto states_per_arc = [&](int a) {
        return sel.energy.alr ? int(inst.links[a].rate_configs.size())
                              : inst.links[a].num_cards + 1;
    };

    if (sel.family == OracleSelector::Energy || sel.family == OracleSelector::Multiperiod) {
        if (sel.energy.alr)
            for (const LinkSpec& l : inst.links)
                if (l.rate_configs.empty())
                    throw Error("alr oracle requires rate_configs on every link");
        long long per_period = 1;
        for (int a = 0; a < A; ++a)
            per_period = detail::saturating_mul(per_period, states_per_arc(a));
        long long with_nodes = detail::saturating_mul(per_period, 1LL << std::min(V, 40));
        const int S = sel.family == OracleSelector::Multiperiod
                          ? (inst.multi_period() ? int(inst.periods.size()) : 1)
                          : 1;
        if (sel.family == OracleSelector::Multiperiod && !inst.multi_period())
            throw Error("multiperiod oracle needs instance.periods");
        long long required = with_nodes;
        for (int s = 1; s < S; ++s) required = detail::saturating_mul(required, with_nodes);
        out.states_required = required;
        if (required > limits.max_states) {
            out.status = OracleStatus::LimitExceeded;
            return out;
        }

        if (sel.family == OracleSelector::Energy) {
            std::vector<double> rates;
            for (const Demand& d : inst.demands) rates.push_back(d.rate);
            std::vector<int> state(A, 0);
            std::function<void(int)> scan = [&](int pos) {
                if (out.status == OracleStatus::LimitExceeded) return;
                if (pos == A) {
                    ++out.states_examined;
                    if ((out.states_examined & 0xff) == 0 && out_of_time()) {
                        out.status = OracleStatus::LimitExceeded;
                        return;
                    }
                    detail::EnergyStateEval ev =
                        detail::evaluate_energy_state(inst, topo, sel, state, rates, out.power);
                    if (ev.feasible && ev.power < out.power - 1e-9) {
                        out.power = ev.power;
                        out.status = OracleStatus::Solved;
                        Solution sol;
                        sol.variant = "energy";
                        sol.alr = sel.energy.alr;
                        sol.num_periods = 1;
                        sol.node_on = {ev.node_on};
                        sol.link_state = {state};
                        sol.commodities = ev.kind;
                        sol.commodity_keys = ev.keys;
                        sol.flows = {ev.flows};
                        sol.total_power = ev.power;
                        out.best = std::move(sol);
                    }
                    return;
                }
                int a = order[pos];
                for (int v = 0; v < states_per_arc(a); ++v) {
                    state[a] = v;
                    scan(pos + 1);
                    if (out.status == OracleStatus::LimitExceeded) return;
                }
            };
            scan(0);
            return out;
        }

        // Multiperiod: product of per-period link states; free node-periods
        // are closed per node by a tiny cyclic enumeration.
        const double delta = inst.reactivation_fraction;
        std::vector<std::vector<double>> period_rates(S);
        for (int s = 0; s < S; ++s) period_rates[s] = eanm::period_rates(inst, s);
        std::vector<std::vector<int>> state(S, std::vector<int>(A, 0));
        std::vector<detail::EnergyStateEval> evals(S);
        std::function<void(int)> scan_period = [&](int s) {
            if (out.status == OracleStatus::LimitExceeded) return;
            if (s == S) {
                // per-card reactivation budget over the cyclic horizon
                for (int a = 0; a < A; ++a) {
                    double total = 0.0;
                    for (int sig = 0; sig < S; ++sig) {
                        int prev = (sig + S - 1) % S;
                        int dlt = state[sig][a] - state[prev][a];
                        if (dlt > 0) total += dlt;
                    }
                    if (total > double(inst.links[a].num_cards) * inst.max_reactivations) return;
                }
                double link_and_flow = 0.0;
                for (int sig = 0; sig < S; ++sig) {
                    if (!evals[sig].feasible) return;
                    double node_fixed = 0.0;
                    for (int i = 0; i < V; ++i)
                        if (evals[sig].node_on[i]) node_fixed += inst.nodes[i].fixed_power;
                    link_and_flow += evals[sig].power - node_fixed;
                }
                // optimal node schedules covering the per-period requirements
                double node_cost = 0.0;
                std::vector<std::vector<bool>> schedule(S, std::vector<bool>(V, false));
                for (int i = 0; i < V; ++i) {
                    double pi = inst.nodes[i].fixed_power;
                    uint32_t must = 0;
                    for (int sig = 0; sig < S; ++sig)
                        if (evals[sig].node_on[i]) must |= 1u << sig;
                    double best_cost = kInf;
                    uint32_t best_set = must;
                    for (uint32_t set = 0; set < (1u << S); ++set) {
                        if ((set & must) != must) continue;
                        double cost = 0.0;
                        for (int sig = 0; sig < S; ++sig) {
                            int prev = (sig + S - 1) % S;
                            bool on = set >> sig & 1, was = set >> prev & 1;
                            if (on) cost += pi;
                            if (on && !was) cost += delta * pi;
                        }
                        if (cost < best_cost - 1e-12) {
                            best_cost = cost;
                            best_set = set;
                        }
                    }
                    node_cost += best_cost;
                    for (int sig = 0; sig < S; ++sig)
                        schedule[sig][i] = (best_set >> sig & 1) != 0;
                }
                double total = link_and_flow + node_cost;
                ++out.states_examined;
                if ((out.states_examined & 0x3f) == 0 && out_of_time()) {
                    out.status = OracleStatus::LimitExceeded;
                    return;
                }
                if (total < out.power - 1e-9) {
                    out.power = total;
                    out.status = OracleStatus::Solved;
                    Solution sol;
                    sol.variant = "multiperiod";
                    sol.num_periods = S;
                    sol.link_state = state;
                    sol.node_on = schedule;
                    sol.commodities = CommodityKind::PerSource;
                    // merge commodity keys across periods
                    for (int sig = 0; sig < S; ++sig)
                        for (const std::string& k : evals[sig].keys)
                            if (std::find(sol.commodity_keys.begin(), sol.commodity_keys.end(),
                                          k) == sol.commodity_keys.end())
                                sol.commodity_keys.push_back(k);
                    sol.flows.assign(S, {});
                    for (int sig = 0; sig < S; ++sig) {
                        sol.flows[sig].assign(sol.commodity_keys.size(),
                                              std::vector<double>(A, 0.0));
                        for (size_t k = 0; k < evals[sig].keys.size(); ++k) {
                            auto it = std::find(sol.commodity_keys.begin(),
                                                sol.commodity_keys.end(), evals[sig].keys[k]);
                            sol.flows[sig][it - sol.commodity_keys.begin()] =
                                evals[sig].flows[k];
                        }
                    }
                    sol.total_power = total;
                    out.best = std::move(sol);
                }
                return;
            }
            std::function<void(int)> scan_arc = [&](int pos) {
                if (out.status == OracleStatus::LimitExceeded) return;
                if (pos == A) {
                    evals[s] = detail::evaluate_energy_state(inst, topo, sel, state[s],
                                                             period_rates[s]);
                    if (evals[s].feasible) scan_period(s + 1);
                    return;
                }
                int a = order[pos];
                for (int v = 0; v < states_per_arc(a); ++v) {
                    state[s][a] = v;
                    scan_arc(pos + 1);
                    if (out.status == OracleStatus::LimitExceeded) return;
                }
            };
            scan_arc(0);
        };
        scan_period(0);
        return out;
    }

    // Protection: enumerate link-disjoint simple path pairs per demand.
    if (sel.protection == ProtectionMode::None)
        throw Error("protection oracle needs a protection mode");
    bool smart = sel.protection == ProtectionMode::SmartDedicated ||
                 sel.protection == ProtectionMode::SmartShared;
    bool shared = sel.protection == ProtectionMode::Shared ||
                  sel.protection == ProtectionMode::SmartShared;
    const int D = int(inst.demands.size());
    std::vector<std::vector<std::vector<int>>> all_paths(D);
    for (int d = 0; d < D; ++d) {
        int o = topo.node(inst.demands[d].origin);
        int t = topo.node(inst.demands[d].destination);
        std::vector<int> cur;
        std::vector<bool> visited(V, false);
        visited[o] = true;
        std::function<void(int)> dfs = [&](int v) {
            if (int(all_paths[d].size()) > limits.max_states) return;
            if (v == t) {
                all_paths[d].push_back(cur);
                return;
            }
            if (int(cur.size()) >= V - 1) return;
            std::vector<int> outs = topo.out_arcs[v];
            std::sort(outs.begin(), outs.end(), [&](int x, int y) {
                return std::tie(inst.links[x].from, inst.links[x].to) <
                       std::tie(inst.links[y].from, inst.links[y].to);
            });
            for (int a : outs) {
                int w = topo.arcs[a].second;
                if (visited[w]) continue;
                visited[w] = true;
                cur.push_back(a);
                dfs(w);
                cur.pop_back();
                visited[w] = false;
            }
        };
        dfs(o);
    }
    auto arcs_conflict = [&](const std::vector<int>& p, const std::vector<int>& q) {
        for (int a : p) {
            auto [u, v] = topo.arcs[a];
            for (int b : q) {
                auto [x, y] = topo.arcs[b];
                if ((u == x && v == y) || (u == y && v == x)) return true;
            }
        }
        return false;
    };
    std::vector<std::vector<std::pair<int, int>>> pairs(D);
    long long required = 1;
    for (int d = 0; d < D; ++d) {
        for (size_t p = 0; p < all_paths[d].size(); ++p)
            for (size_t q = 0; q < all_paths[d].size(); ++q)
                if (p != q && !arcs_conflict(all_paths[d][p], all_paths[d][q]))
                    pairs[d].push_back({int(p), int(q)});
        if (pairs[d].empty()) {
            out.status = OracleStatus::Infeasible;
            out.states_required = 0;
            return out;
        }
        required = detail::saturating_mul(required, (long long)pairs[d].size());
    }
    out.states_required = required;
    if (required > limits.max_states) {
        out.status = OracleStatus::LimitExceeded;
        return out;
    }
    std::vector<int> choice(D, 0);
    std::function<void(int)> scan = [&](int d) {
        if (out.status == OracleStatus::LimitExceeded) return;
        if (d == D) {
            ++out.states_examined;
            if ((out.states_examined & 0xff) == 0 && out_of_time()) {
                out.status = OracleStatus::LimitExceeded;
                return;
            }
            std::vector<double> primary(A, 0.0), reserved(A, 0.0);
            for (int k = 0; k < D; ++k) {
                double r = inst.demands[k].rate;
                for (int a : all_paths[k][pairs[k][choice[k]].first]) {
                    primary[a] += r;
                    reserved[a] += r;
                }
            }
            if (!shared) {
                for (int k = 0; k < D; ++k)
                    for (int a : all_paths[k][pairs[k][choice[k]].second])
                        reserved[a] += inst.demands[k].rate;
            } else {
                for (int a = 0; a < A; ++a) {
                    double worst = 0.0;
                    for (int f = 0; f < A; ++f) {
                        if (f == a) continue;
                        double rerouted = 0.0;
                        for (int k = 0; k < D; ++k) {
                            bool hit = false, uses = false;
                            for (int pa : all_paths[k][pairs[k][choice[k]].first])
                                if (pa == f) hit = true;
                            for (int ba : all_paths[k][pairs[k][choice[k]].second])
                                if (ba == a) uses = true;
                            if (hit && uses) rerouted += inst.demands[k].rate;
                        }
                        worst = std::max(worst, rerouted);
                    }
                    reserved[a] += worst;
                }
            }
            double power = 0.0;
            std::vector<int> cards(A, 0);
            std::vector<bool> on(V, false);
            for (int a = 0; a < A; ++a) {
                const LinkSpec& l = inst.links[a];
                double unit = l.max_utilization * l.card_capacity;
                double sizing = smart ? primary[a] : reserved[a];
                if (reserved[a] > unit * l.num_cards + 1e-9) return;  // physically impossible
                if (sizing > 0.0) {
                    if (unit <= 0.0) return;
                    cards[a] = int(std::ceil(sizing / unit - 1e-9));
                    if (cards[a] > l.num_cards) return;
                    on[topo.arcs[a].first] = true;
                    on[topo.arcs[a].second] = true;
                    power += cards[a] * l.fixed_power;
                    power += l.per_unit_power * sizing;
                }
            }
            for (int i = 0; i < V; ++i)
                if (on[i]) power += inst.nodes[i].fixed_power;
            if (power < out.power - 1e-9) {
                out.power = power;
                out.status = OracleStatus::Solved;
                Solution sol;
                sol.variant = std::string("protection.") + to_string(sel.protection);
                sol.has_protection = true;
                sol.smart = smart;
                sol.shared_backup = shared;
                sol.num_periods = 1;
                sol.link_state = {cards};
                sol.node_on = {std::vector<bool>(on.begin(), on.end())};
                sol.primary.assign(1, {});
                sol.backup.assign(1, {});
                for (int k = 0; k < D; ++k) {
                    sol.primary[0].push_back(all_paths[k][pairs[k][choice[k]].first]);
                    sol.backup[0].push_back(all_paths[k][pairs[k][choice[k]].second]);
                }
                sol.total_power = power;
                out.best = std::move(sol);
            }
            return;
        }
        for (size_t c = 0; c < pairs[d].size(); ++c) {
            choice[d] = int(c);
            scan(d + 1);
            if (out.status == OracleStatus::LimitExceeded) return;
        }
    };
    scan(0);
    return out;
}

}  // namespace eanm
