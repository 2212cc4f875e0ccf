// Graph-side algorithms that stay clear of the MILP machinery: shortest
// distances, ECMP load propagation (float or exact rational), loopless
// K-shortest paths, and LP/KSP routability tests for the heuristics.
#pragma once

#include <numeric>
#include <queue>
#include <set>
#include <span>
#include <vector>

#include "eanm/lp.hpp"
#include "eanm/model.hpp"
#include "eanm/solution.hpp"

namespace eanm {

struct WeightSet {
    std::vector<double> omega;  // per arc, in [1, omega_max]

    static WeightSet from_instance(const Instance& inst) {
        WeightSet w;
        for (const LinkSpec& l : inst.links) w.omega.push_back(l.weight.value_or(1.0));
        return w;
    }

    std::vector<std::string> check(const Instance& inst) const {
        std::vector<std::string> bad;
        if (omega.size() != inst.links.size()) {
            bad.push_back("weight set size mismatch");
            return bad;
        }
        for (size_t a = 0; a < omega.size(); ++a)
            if (omega[a] < 1.0 - 1e-12 || omega[a] > inst.omega_max + 1e-12)
                bad.push_back("weight on " + arc_key(inst.links[a]) + " outside [1, omega_max]");
        return bad;
    }
};

struct LoadMap {
    std::vector<double> arc_load;
    std::vector<double> node_load;  // entering flow plus originated traffic
};

/// Which devices are awake: per-arc active card count (or config index
/// capacity for rate-adaptive links) and per-node chassis state.
struct ActiveMask {
    std::vector<bool> node_on;
    std::vector<int> link_cards;

    static ActiveMask all_on(const Instance& inst) {
        ActiveMask m;
        m.node_on.assign(inst.nodes.size(), true);
        for (const LinkSpec& l : inst.links) m.link_cards.push_back(l.num_cards);
        return m;
    }

    bool arc_active(const Topology& topo, int a) const {
        auto [u, v] = topo.arcs[a];
        return link_cards[a] > 0 && node_on[u] && node_on[v];
    }
};

/// Usable capacity of an arc under the mask (utilization threshold applied).
inline double masked_capacity(const Instance& inst, const ActiveMask& mask, int a) {
    const LinkSpec& l = inst.links[a];
    if (!l.rate_configs.empty()) {
        int e = std::min<int>(mask.link_cards[a], int(l.rate_configs.size()) - 1);
        return l.max_utilization * l.rate_configs[e].capacity;
    }
    return l.max_utilization * l.card_capacity * mask.link_cards[a];
}

// ---------------------------------------------------------------------------
// shortest_distances: single-destination Dijkstra over active arcs
// ---------------------------------------------------------------------------

inline std::vector<double> shortest_distances(const Instance& inst, const WeightSet& weights,
                                              int destination, const ActiveMask& mask) {
    Topology topo = make_topology(inst);
    std::vector<double> dist(topo.num_nodes, kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    if (destination < 0 || destination >= topo.num_nodes) throw Error("bad destination index");
    dist[destination] = 0.0;
    heap.push({0.0, destination});
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v] + 1e-15) continue;
        for (int a : topo.in_arcs[v]) {
            if (!mask.arc_active(topo, a)) continue;
            int u = topo.arcs[a].first;
            double nd = d + weights.omega[a];
            if (nd < dist[u] - 1e-15) {
                dist[u] = nd;
                heap.push({nd, u});
            }
        }
    }
    return dist;
}

inline std::vector<double> shortest_distances(const Instance& inst, const WeightSet& weights,
                                              const std::string& destination,
                                              const ActiveMask& mask) {
    return shortest_distances(inst, weights, make_topology(inst).node(destination), mask);
}

// ---------------------------------------------------------------------------
// compute_ecmp_loads
// ---------------------------------------------------------------------------

/// Small exact rational for the test-mode propagation; throws on overflow
/// rather than rounding silently.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n) {}
    Rational(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw Error("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    static long long checked_mul(long long a, long long b) {
        __int128 r = static_cast<__int128>(a) * b;
        if (r > INT64_MAX || r < INT64_MIN) throw Error("rational overflow");
        return static_cast<long long>(r);
    }

    Rational operator+(const Rational& o) const {
        return Rational(checked_mul(num, o.den) + checked_mul(o.num, den),
                        checked_mul(den, o.den));
    }
    Rational operator/(long long k) const { return Rational(num, checked_mul(den, k)); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool is_zero() const { return num == 0; }
    double to_double() const { return double(num) / double(den); }
};

template <class Flow>
struct EcmpLoads {
    std::vector<Flow> arc_load;
    std::vector<Flow> node_load;
};

namespace detail {

// Per-destination downstream propagation: visit nodes farthest-first so all
// upstream contributions have arrived before a node splits its share equally
// over the outgoing shortest-path arcs.
template <class Flow>
void ecmp_propagate(const Instance& inst, const Topology& topo, const WeightSet& weights,
                    const ActiveMask& mask, int dest, const std::vector<Flow>& supply,
                    const std::vector<double>& dist, double tie_tol, EcmpLoads<Flow>& out) {
    std::vector<int> order;
    for (int i = 0; i < topo.num_nodes; ++i)
        if (std::isfinite(dist[i]) && i != dest) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (dist[a] != dist[b]) return dist[a] > dist[b];
        return a < b;
    });
    std::vector<Flow> pending = supply;
    for (int i : order) {
        out.node_load[i] = out.node_load[i] + pending[i];
        if (pending[i] == Flow(0)) continue;
        std::vector<int> sp_arcs;
        for (int a : topo.out_arcs[i]) {
            if (!mask.arc_active(topo, a)) continue;
            int j = topo.arcs[a].second;
            if (!std::isfinite(dist[j])) continue;
            if (std::fabs(dist[i] - (weights.omega[a] + dist[j])) <= tie_tol)
                sp_arcs.push_back(a);
        }
        if (sp_arcs.empty())
            throw Error("ecmp propagation stuck at node " + inst.nodes[i].id +
                        " toward " + inst.nodes[dest].id);
        Flow share = pending[i] / static_cast<long long>(sp_arcs.size());
        for (int a : sp_arcs) {
            out.arc_load[a] = out.arc_load[a] + share;
            pending[topo.arcs[a].second] = pending[topo.arcs[a].second] + share;
        }
    }
    out.node_load[dest] = out.node_load[dest] + pending[dest];
}

}  // namespace detail

/// Float-mode ECMP propagation over all demands. Throws when a demand's
/// destination is unreachable across the active devices.
inline LoadMap compute_ecmp_loads(const Instance& inst, const WeightSet& weights,
                                  const ActiveMask& mask, std::span<const double> rates,
                                  double tie_tol = 1e-9) {
    Topology topo = make_topology(inst);
    if (rates.size() != inst.demands.size()) throw Error("rates size mismatch");
    EcmpLoads<double> acc;
    acc.arc_load.assign(topo.arcs.size(), 0.0);
    acc.node_load.assign(topo.num_nodes, 0.0);
    std::set<int> dests;
    for (size_t d = 0; d < inst.demands.size(); ++d)
        if (rates[d] > 0.0) dests.insert(topo.node(inst.demands[d].destination));
    for (int t : dests) {
        std::vector<double> dist = shortest_distances(inst, weights, t, mask);
        std::vector<double> supply(topo.num_nodes, 0.0);
        for (size_t d = 0; d < inst.demands.size(); ++d) {
            if (rates[d] <= 0.0 || topo.node(inst.demands[d].destination) != t) continue;
            int o = topo.node(inst.demands[d].origin);
            if (!std::isfinite(dist[o]))
                throw Error("demand " + std::to_string(d) + " (" + inst.demands[d].origin + ">" +
                            inst.demands[d].destination + ") is unreachable");
            supply[o] += rates[d];
        }
        detail::ecmp_propagate(inst, topo, weights, mask, t, supply, dist, tie_tol, acc);
    }
    return {std::move(acc.arc_load), std::move(acc.node_load)};
}

/// Exact-rational propagation for integer rates: conservation holds with no
/// floating error. Distances (and therefore tie decisions) still use doubles.
inline EcmpLoads<Rational> compute_ecmp_loads_exact(const Instance& inst,
                                                    const WeightSet& weights,
                                                    const ActiveMask& mask,
                                                    std::span<const long long> rates,
                                                    double tie_tol = 1e-9) {
    Topology topo = make_topology(inst);
    if (rates.size() != inst.demands.size()) throw Error("rates size mismatch");
    EcmpLoads<Rational> acc;
    acc.arc_load.assign(topo.arcs.size(), Rational(0));
    acc.node_load.assign(topo.num_nodes, Rational(0));
    std::set<int> dests;
    for (size_t d = 0; d < inst.demands.size(); ++d)
        if (rates[d] > 0) dests.insert(topo.node(inst.demands[d].destination));
    for (int t : dests) {
        std::vector<double> dist = shortest_distances(inst, weights, t, mask);
        std::vector<Rational> supply(topo.num_nodes, Rational(0));
        for (size_t d = 0; d < inst.demands.size(); ++d) {
            if (rates[d] <= 0 || topo.node(inst.demands[d].destination) != t) continue;
            int o = topo.node(inst.demands[d].origin);
            if (!std::isfinite(dist[o]))
                throw Error("demand " + std::to_string(d) + " is unreachable");
            supply[o] = supply[o] + Rational(rates[d]);
        }
        detail::ecmp_propagate(inst, topo, weights, mask, t, supply, dist, tie_tol, acc);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// k_shortest_paths: deviation-based loopless enumeration
// ---------------------------------------------------------------------------

namespace detail {

struct PathCandidate {
    double weight;
    std::vector<int> arcs;

    bool operator<(const PathCandidate& o) const {
        if (weight != o.weight) return weight < o.weight;
        return arcs < o.arcs;  // lexicographic arc sequence breaks ties
    }
    bool operator==(const PathCandidate& o) const { return arcs == o.arcs; }
};

// Forward Dijkstra that returns one shortest path with deterministic ties
// (smaller predecessor arc index wins).
inline bool dijkstra_path(const Topology& topo, const WeightSet& weights, const ActiveMask& mask,
                          int src, int dst, const std::set<int>& banned_arcs,
                          const std::set<int>& banned_nodes, PathCandidate& out) {
    int n = topo.num_nodes;
    std::vector<double> dist(n, kInf);
    std::vector<int> via(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[src] = 0.0;
    heap.push({0.0, src});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u] + 1e-15) continue;
        for (int a : topo.out_arcs[u]) {
            if (banned_arcs.count(a) || !mask.arc_active(topo, a)) continue;
            int v = topo.arcs[a].second;
            if (banned_nodes.count(v)) continue;
            double nd = d + weights.omega[a];
            if (nd < dist[v] - 1e-15 ||
                (nd < dist[v] + 1e-15 && via[v] >= 0 && a < via[v])) {
                dist[v] = std::min(nd, dist[v]);
                via[v] = a;
                heap.push({nd, v});
            }
        }
    }
    if (!std::isfinite(dist[dst])) return false;
    out.weight = dist[dst];
    out.arcs.clear();
    for (int v = dst; v != src;) {
        int a = via[v];
        out.arcs.push_back(a);
        v = topo.arcs[a].first;
    }
    std::reverse(out.arcs.begin(), out.arcs.end());
    return true;
}

}  // namespace detail

inline std::vector<std::vector<int>> k_shortest_paths(const Instance& inst,
                                                      const WeightSet& weights,
                                                      const Demand& demand, int k,
                                                      const ActiveMask* mask_in = nullptr) {
    if (k < 1) throw Error("k_shortest_paths: K must be >= 1");
    Topology topo = make_topology(inst);
    ActiveMask mask = mask_in ? *mask_in : ActiveMask::all_on(inst);
    int src = topo.node(demand.origin);
    int dst = topo.node(demand.destination);
    std::vector<detail::PathCandidate> accepted;
    std::set<detail::PathCandidate> tentative;
    detail::PathCandidate first;
    if (!detail::dijkstra_path(topo, weights, mask, src, dst, {}, {}, first)) return {};
    accepted.push_back(std::move(first));
    while (int(accepted.size()) < k) {
        const detail::PathCandidate& prev = accepted.back();
        std::set<int> root_nodes;
        detail::PathCandidate root{0.0, {}};
        for (size_t spur = 0; spur < prev.arcs.size(); ++spur) {
            int spur_node = topo.arcs[prev.arcs[spur]].first;
            std::set<int> banned_arcs;
            for (const detail::PathCandidate& p : accepted) {
                if (p.arcs.size() <= spur) continue;
                bool same_root = std::equal(root.arcs.begin(), root.arcs.end(), p.arcs.begin());
                if (same_root) banned_arcs.insert(p.arcs[spur]);
            }
            detail::PathCandidate spur_path;
            if (detail::dijkstra_path(topo, weights, mask, spur_node, dst, banned_arcs,
                                      root_nodes, spur_path)) {
                detail::PathCandidate full;
                full.weight = root.weight + spur_path.weight;
                full.arcs = root.arcs;
                full.arcs.insert(full.arcs.end(), spur_path.arcs.begin(), spur_path.arcs.end());
                tentative.insert(std::move(full));
            }
            root_nodes.insert(spur_node);
            root.weight += weights.omega[prev.arcs[spur]];
            root.arcs.push_back(prev.arcs[spur]);
        }
        bool took = false;
        while (!tentative.empty()) {
            detail::PathCandidate best = *tentative.begin();
            tentative.erase(tentative.begin());
            bool dup = false;
            for (const detail::PathCandidate& p : accepted)
                if (p == best) { dup = true; break; }
            if (!dup) {
                accepted.push_back(std::move(best));
                took = true;
                break;
            }
        }
        if (!took) break;
    }
    std::vector<std::vector<int>> out;
    for (auto& p : accepted) out.push_back(std::move(p.arcs));
    return out;
}

// ---------------------------------------------------------------------------
// routable: feasibility of a traffic matrix on the active devices
// ---------------------------------------------------------------------------

struct FeasMethod {
    enum Kind { Lp, Ksp, Ecmp } kind = Lp;
    int k = 3;            // Ksp only
    WeightSet weights;    // Ecmp only; empty means instance weights
    static FeasMethod lp() { return {}; }
    static FeasMethod ksp(int k) { return {Ksp, k, {}}; }
    static FeasMethod ecmp(WeightSet w) { return {Ecmp, 3, std::move(w)}; }
};

struct RouteCheck {
    bool feasible = false;
    LoadMap witness;
    // The routing behind the witness, one flow vector per commodity, so a
    // heuristic's output can be validated like any other solution.
    CommodityKind commodity_kind = CommodityKind::PerSource;
    std::vector<std::string> commodity_keys;
    std::vector<std::vector<double>> commodity_flows;
    std::string detail;
};

namespace detail {

// The per-source routing LP on the active sub-network. This is also the
// oracle's only LP: objective can carry the load-proportional power term.
struct RoutingLpCols {
    std::vector<std::string> sources;
    std::vector<std::vector<int>> var;  // [source][arc], -1 when inactive
};

inline LpSolution routing_lp(const Instance& inst, const Topology& topo, const ActiveMask& mask,
                             std::span<const double> rates, bool with_load_cost,
                             LinearProgram* out_lp, RoutingLpCols* out_cols = nullptr) {
    LinearProgram lp;
    const int A = int(topo.arcs.size());
    std::map<std::string, std::map<int, double>> sink;  // source id -> node -> rate
    std::map<std::string, double> total;
    for (size_t d = 0; d < inst.demands.size(); ++d) {
        if (rates[d] <= 0.0) continue;
        sink[inst.demands[d].origin][topo.node(inst.demands[d].destination)] += rates[d];
        total[inst.demands[d].origin] += rates[d];
    }
    std::vector<std::vector<int>> cols;
    std::vector<std::string> sources;
    for (auto& [src, dests] : sink) {
        sources.push_back(src);
        cols.emplace_back(A, -1);
        for (int a = 0; a < A; ++a) {
            if (!mask.arc_active(topo, a)) continue;
            double cost = with_load_cost ? inst.links[a].per_unit_power : 0.0;
            cols.back()[a] = lp.add_variable("fs(" + arc_key(inst.links[a]) + "|" + src + ")",
                                             0.0, kInf, cost);
        }
        int s = topo.node(src);
        for (int i = 0; i < topo.num_nodes; ++i) {
            std::vector<std::pair<int, double>> c;
            for (int a : topo.out_arcs[i])
                if (cols.back()[a] >= 0) c.push_back({cols.back()[a], 1.0});
            for (int a : topo.in_arcs[i])
                if (cols.back()[a] >= 0) c.push_back({cols.back()[a], -1.0});
            double rhs = 0.0;
            if (i == s) rhs = total[src];
            else if (auto it = dests.find(i); it != dests.end()) rhs = -it->second;
            if (c.empty() && rhs == 0.0) continue;
            if (c.empty()) return {LpStatus::Infeasible, 0.0, {}, {}, 0.0, 0, "isolated demand"};
            lp.add_row("bal(" + src + "|" + inst.nodes[i].id + ")", Relation::Equal, rhs, c);
        }
    }
    for (int a = 0; a < A; ++a) {
        if (!mask.arc_active(topo, a)) continue;
        std::vector<std::pair<int, double>> c;
        for (size_t s = 0; s < cols.size(); ++s)
            if (cols[s][a] >= 0) c.push_back({cols[s][a], 1.0});
        if (c.empty()) continue;
        lp.add_row("cap(" + arc_key(inst.links[a]) + ")", Relation::LessEqual,
                   masked_capacity(inst, mask, a), c);
    }
    // node load-proportional cost enters via the entering-flow identity
    if (with_load_cost) {
        for (int i = 0; i < topo.num_nodes; ++i) {
            double slope = inst.nodes[i].per_unit_power;
            if (slope == 0.0) continue;
            for (int a : topo.in_arcs[i])
                for (size_t s = 0; s < cols.size(); ++s)
                    if (cols[s][a] >= 0) lp.variables[cols[s][a]].objective += slope;
        }
    }
    if (out_lp) *out_lp = lp;
    if (out_cols) *out_cols = {std::move(sources), std::move(cols)};
    LpSolution sol = solve_lp(lp);
    return sol;
}

inline void finish_witness(const Instance& inst, const Topology& topo,
                           std::span<const double> rates, RouteCheck& rc) {
    rc.witness.arc_load.assign(topo.arcs.size(), 0.0);
    rc.witness.node_load.assign(topo.num_nodes, 0.0);
    for (const auto& flow : rc.commodity_flows)
        for (size_t a = 0; a < flow.size(); ++a) rc.witness.arc_load[a] += flow[a];
    for (int i = 0; i < topo.num_nodes; ++i)
        for (int a : topo.in_arcs[i]) rc.witness.node_load[i] += rc.witness.arc_load[a];
    for (size_t d = 0; d < inst.demands.size(); ++d)
        rc.witness.node_load[topo.node(inst.demands[d].origin)] += rates[d];
}

}  // namespace detail

inline RouteCheck routable(const Instance& inst, const ActiveMask& mask,
                           std::span<const double> rates, const FeasMethod& method) {
    Topology topo = make_topology(inst);
    RouteCheck rc;
    switch (method.kind) {
        case FeasMethod::Lp: {
            LinearProgram lp;
            detail::RoutingLpCols cols;
            LpSolution sol = detail::routing_lp(inst, topo, mask, rates, false, &lp, &cols);
            if (sol.status == LpStatus::Optimal) {
                rc.feasible = true;
                rc.commodity_kind = CommodityKind::PerSource;
                for (size_t s = 0; s < cols.sources.size(); ++s) {
                    rc.commodity_keys.push_back("s:" + cols.sources[s]);
                    std::vector<double> flow(topo.arcs.size(), 0.0);
                    for (size_t a = 0; a < flow.size(); ++a)
                        if (cols.var[s][a] >= 0) flow[a] = sol.values[cols.var[s][a]];
                    rc.commodity_flows.push_back(std::move(flow));
                }
                detail::finish_witness(inst, topo, rates, rc);
            } else {
                rc.detail = to_string(sol.status);
            }
            break;
        }
        case FeasMethod::Ksp: {
            WeightSet w = WeightSet::from_instance(inst);
            std::vector<double> residual(topo.arcs.size());
            for (size_t a = 0; a < topo.arcs.size(); ++a)
                residual[a] = masked_capacity(inst, mask, int(a));
            rc.feasible = true;
            rc.commodity_kind = CommodityKind::PerDemand;
            for (size_t d = 0; d < inst.demands.size(); ++d) {
                rc.commodity_keys.push_back("d" + std::to_string(d));
                rc.commodity_flows.emplace_back(topo.arcs.size(), 0.0);
                if (rates[d] <= 0.0) continue;
                auto paths = k_shortest_paths(inst, w, inst.demands[d], method.k, &mask);
                bool placed = false;
                for (const auto& path : paths) {
                    bool fits = true;
                    for (int a : path)
                        if (residual[a] < rates[d] - 1e-9) { fits = false; break; }
                    if (!fits) continue;
                    for (int a : path) {
                        residual[a] -= rates[d];
                        rc.commodity_flows.back()[a] += rates[d];
                    }
                    placed = true;
                    break;
                }
                if (!placed) {
                    rc.feasible = false;
                    rc.commodity_keys.clear();
                    rc.commodity_flows.clear();
                    rc.detail = "demand " + std::to_string(d) + " does not fit on any of " +
                                std::to_string(paths.size()) + " candidate paths";
                    break;
                }
            }
            if (rc.feasible) detail::finish_witness(inst, topo, rates, rc);
            break;
        }
        case FeasMethod::Ecmp: {
            WeightSet w = method.weights.omega.empty() ? WeightSet::from_instance(inst)
                                                       : method.weights;
            try {
                rc.commodity_kind = CommodityKind::PerDestination;
                std::set<std::string> dests;
                for (size_t d = 0; d < inst.demands.size(); ++d)
                    if (rates[d] > 0.0) dests.insert(inst.demands[d].destination);
                for (const std::string& t : dests) {
                    std::vector<double> only(rates.size(), 0.0);
                    for (size_t d = 0; d < inst.demands.size(); ++d)
                        if (inst.demands[d].destination == t) only[d] = rates[d];
                    LoadMap lm = compute_ecmp_loads(inst, w, mask, only);
                    rc.commodity_keys.push_back("t:" + t);
                    rc.commodity_flows.push_back(std::move(lm.arc_load));
                }
                detail::finish_witness(inst, topo, rates, rc);
                rc.feasible = true;
                for (size_t a = 0; a < topo.arcs.size(); ++a) {
                    if (rc.witness.arc_load[a] > masked_capacity(inst, mask, int(a)) + 1e-9) {
                        rc.feasible = false;
                        rc.detail = "utilization exceeded on " + arc_key(inst.links[a]);
                        break;
                    }
                }
            } catch (const Error& e) {
                rc.feasible = false;
                rc.detail = e.what();
            }
            break;
        }
    }
    return rc;
}

}  // namespace eanm
