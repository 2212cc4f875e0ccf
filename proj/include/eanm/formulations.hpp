// Translates an Instance into MILP models: splittable / per-source /
// per-path / single-path routing, device sleeping (binary, bundled, rate
// adaptive), single-link-failure protection, multi-period scheduling, and
// shortest-path ECMP weight optimization. Every column is registered in a
// SymbolMap so solutions can be read back without string guessing.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "eanm/milp.hpp"
#include "eanm/model.hpp"
#include "eanm/solution.hpp"

namespace eanm {

// ---------------------------------------------------------------------------
// Option types
// ---------------------------------------------------------------------------

struct RoutingScheme {
    enum Kind { PerFlow, PerSource, PerPath, SinglePath };
    Kind kind = PerFlow;
    // PerPath only: candidate arc-index paths per demand index.
    std::map<int, std::vector<std::vector<int>>> demand_paths;
    bool binary_paths = false;  // unsplittable per-path routing

    static RoutingScheme per_flow() { return {}; }
    static RoutingScheme per_source() { return {PerSource, {}, false}; }
    static RoutingScheme single_path() { return {SinglePath, {}, false}; }
};

struct EnergyOptions {
    bool sleep_links = true;
    bool sleep_nodes = true;
    bool bundled = false;  // integer card counts instead of a binary link state
    bool alr = false;      // one (capacity, power) config active per link
    bool use_big_m_coherence = false;
};

enum class ProtectionMode { None, Dedicated, Shared, SmartDedicated, SmartShared };

inline const char* to_string(ProtectionMode m) {
    switch (m) {
        case ProtectionMode::None: return "none";
        case ProtectionMode::Dedicated: return "dedicated";
        case ProtectionMode::Shared: return "shared";
        case ProtectionMode::SmartDedicated: return "smart_dedicated";
        case ProtectionMode::SmartShared: return "smart_shared";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// SymbolMap: family/key <-> column bookkeeping
// ---------------------------------------------------------------------------

class SymbolMap {
  public:
    void bind(const std::string& family, const std::string& key, const std::string& column) {
        std::string sym = family + "(" + key + ")";
        if (!sym_to_col_.emplace(sym, column).second)
            throw Error("symbol bound twice: " + sym);
        if (!col_to_sym_.emplace(column, sym).second)
            throw Error("column in two symbol families: " + column);
    }

    const std::string& column(const std::string& family, const std::string& key) const {
        auto it = sym_to_col_.find(family + "(" + key + ")");
        if (it == sym_to_col_.end())
            throw Error("no column for symbol " + family + "(" + key + ")");
        return it->second;
    }

    bool has(const std::string& family, const std::string& key) const {
        return sym_to_col_.count(family + "(" + key + ")") > 0;
    }

    // Families present in the map, for coverage checks.
    std::set<std::string> families() const {
        std::set<std::string> out;
        for (auto& [sym, col] : sym_to_col_) out.insert(sym.substr(0, sym.find('(')));
        return out;
    }

    // Every model column must belong to exactly one family.
    std::vector<std::string> check(const LinearProgram& lp) const {
        std::vector<std::string> bad;
        for (const LpVariable& v : lp.variables)
            if (!col_to_sym_.count(v.name)) bad.push_back("column without symbol: " + v.name);
        if (col_to_sym_.size() != lp.variables.size())
            bad.push_back("symbol map size mismatch");
        return bad;
    }

  private:
    std::map<std::string, std::string> sym_to_col_;
    std::map<std::string, std::string> col_to_sym_;
};

struct BuildResult {
    MilpModel model;
    SymbolMap symbols;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Shared building machinery
// ---------------------------------------------------------------------------

namespace detail {

struct Build {
    const Instance& inst;
    Topology topo;
    BuildResult out;
    int num_periods;

    explicit Build(const Instance& in)
        : inst(in), topo(make_topology(in)), num_periods(in.multi_period() ? int(in.periods.size()) : 1) {
        auto bad = validate_instance(in);
        if (!bad.empty()) throw Error("invalid instance: " + bad.front());
    }

    std::string period_suffix(int sigma) const {
        return inst.multi_period() ? "@" + inst.periods.at(sigma) : "";
    }

    std::string akey(int a, int sigma = -1) const {
        std::string k = arc_key(inst.links[a]);
        return sigma >= 0 ? k + period_suffix(sigma) : k;
    }

    std::string nkey(int i, int sigma = -1) const {
        return sigma >= 0 ? inst.nodes[i].id + period_suffix(sigma) : inst.nodes[i].id;
    }

    int var(const std::string& family, const std::string& key, double lb, double ub, double
            obj) {
        std::string name = family + "(" + key + ")";
        int j = out.model.lp.add_variable(name, lb, ub, obj);
        out.symbols.bind(family, key, name);
        return j;
    }

    int binary(const std::string& family, const std::string& key, double obj) {
        int j = var(family, key, 0.0, 1.0, obj);
        out.model.integrality[out.model.lp.variables[j].name] = IntegerKind::Binary;
        return j;
    }

    int integer(const std::string& family, const std::string& key, double lb, double ub,
                double obj) {
        int j = var(family, key, lb, ub, obj);
        out.model.integrality[out.model.lp.variables[j].name] = IntegerKind::General;
        return j;
    }

    void row(const std::string& name, Relation rel, double rhs,
             std::vector<std::pair<int, double>> coeffs) {
        out.model.lp.add_row(name, rel, rhs, std::move(coeffs));
    }

    void add_constant(double c) {
        if (c == 0.0) return;
        if (const_var_ < 0) const_var_ = var("const", "", 1.0, 1.0, 0.0);
        out.model.lp.variables[const_var_].objective += c;
    }

    // Convex piecewise profiles enter the objective through an epigraph
    // variable bounded below by every segment's supporting line.
    void attach_load_cost(int flow_var, const std::string& family_key, double per_unit,
                          const std::vector<PowerSegment>& pw) {
        if (pw.empty()) {
            if (per_unit != 0.0) out.model.lp.variables[flow_var].objective += per_unit;
            return;
        }
        int epi = var("pw", family_key, 0.0, kInf, 1.0);
        double base = 0.0, prev = 0.0;
        for (size_t k = 0; k < pw.size(); ++k) {
            double intercept = base - pw[k].slope * prev;
            row("epi(" + family_key + "|" + std::to_string(k) + ")", Relation::GreaterEqual,
                intercept, {{epi, 1.0}, {flow_var, -pw[k].slope}});
            base += pw[k].slope * (pw[k].breakpoint - prev);
            prev = pw[k].breakpoint;
        }
    }

  private:
    int const_var_ = -1;
};

// Per-period flow structure handles.
struct FlowVars {
    std::vector<int> link_flow;             // f(a)
    std::vector<int> node_flow;             // fn(i); empty if not emitted
    std::vector<std::vector<int>> fd;       // [d][a] per-demand (PerFlow / SinglePath x)
    std::vector<std::vector<int>> fs;       // [source][a] per-source
    std::vector<std::string> source_keys;
    std::vector<std::vector<int>> xp;       // [d][p] path fractions
};

inline void check_path(const Build& b, int d, const std::vector<int>& path) {
    const Demand& dem = b.inst.demands[d];
    int at = b.topo.node(dem.origin);
    std::set<int> seen{at};
    for (int a : path) {
        if (a < 0 || a >= int(b.topo.arcs.size()))
            throw Error("demand " + std::to_string(d) + ": path uses unknown arc");
        if (b.topo.arcs[a].first != at)
            throw Error("demand " + std::to_string(d) + ": path is not a connected arc sequence");
        at = b.topo.arcs[a].second;
        if (!seen.insert(at).second)
            throw Error("demand " + std::to_string(d) + ": path revisits a node");
    }
    if (at != b.topo.node(dem.destination))
        throw Error("demand " + std::to_string(d) + ": path does not reach the destination");
}

// Emits flow variables, conservation, link accounting and node accounting for
// one period. `shared_routing` reuses routing variables created for period 0
// (multi-period fixed routing); dimensioning rows stay per period.
inline FlowVars emit_flows(Build& b, const RoutingScheme& scheme, int sigma, bool with_node_flow,
                           const FlowVars* shared_routing) {
    const int A = int(b.topo.arcs.size());
    const int V = b.topo.num_nodes;
    const int D = int(b.inst.demands.size());
    std::string ps = sigma >= 0 ? b.period_suffix(sigma) : "";
    FlowVars fv;
    fv.link_flow.resize(A);
    for (int a = 0; a < A; ++a) fv.link_flow[a] = b.var("f", b.akey(a, sigma), 0.0, kInf, 0.0);

    auto rate = [&](int d) { return sigma >= 0 ? demand_rate(b.inst, b.inst.demands[d], sigma)
                                               : b.inst.demands[d].rate; };

    switch (scheme.kind) {
        case RoutingScheme::PerFlow: {
            if (!shared_routing) {
                fv.fd.assign(D, {});
                for (int d = 0; d < D; ++d) {
                    fv.fd[d].resize(A);
                    std::string dk = "d" + std::to_string(d);
                    for (int a = 0; a < A; ++a)
                        fv.fd[d][a] = b.var("fd", b.akey(a, sigma) + "|" + dk, 0.0, kInf, 0.0);
                    int o = b.topo.node(b.inst.demands[d].origin);
                    int t = b.topo.node(b.inst.demands[d].destination);
                    for (int i = 0; i < V; ++i) {
                        std::vector<std::pair<int, double>> c;
                        for (int a : b.topo.out_arcs[i]) c.push_back({fv.fd[d][a], 1.0});
                        for (int a : b.topo.in_arcs[i]) c.push_back({fv.fd[d][a], -1.0});
                        double rhs = i == o ? rate(d) : (i == t ? -rate(d) : 0.0);
                        b.row("bal(" + dk + "|" + b.nkey(i) + ")" + ps, Relation::Equal, rhs, c);
                    }
                }
            }
            for (int a = 0; a < A; ++a) {
                std::vector<std::pair<int, double>> c{{fv.link_flow[a], -1.0}};
                if (shared_routing) {
                    for (int d = 0; d < D; ++d)
                        c.push_back({shared_routing->fd[d][a], rate(d)});
                } else {
                    for (int d = 0; d < D; ++d) c.push_back({fv.fd[d][a], 1.0});
                }
                b.row("linkflow(" + b.akey(a, sigma) + ")", Relation::Equal, 0.0, c);
            }
            break;
        }
        case RoutingScheme::PerSource: {
            if (shared_routing)
                throw Error("fixed routing is not defined for the per-source scheme");
            std::map<std::string, std::map<std::string, double>> sink;  // source -> node -> rate
            std::map<std::string, double> total;
            for (int d = 0; d < D; ++d) {
                const Demand& dem = b.inst.demands[d];
                sink[dem.origin][dem.destination] += rate(d);
                total[dem.origin] += rate(d);
            }
            for (auto& [src, dests] : sink) {
                int s = b.topo.node(src);
                std::string sk = "s:" + src;
                fv.source_keys.push_back(sk);
                fv.fs.emplace_back(A);
                std::vector<int>& col = fv.fs.back();
                for (int a = 0; a < A; ++a)
                    col[a] = b.var("fs", b.akey(a, sigma) + "|" + sk, 0.0, kInf, 0.0);
                for (int i = 0; i < V; ++i) {
                    std::vector<std::pair<int, double>> c;
                    for (int a : b.topo.out_arcs[i]) c.push_back({col[a], 1.0});
                    for (int a : b.topo.in_arcs[i]) c.push_back({col[a], -1.0});
                    double rhs = 0.0;
                    if (i == s) rhs = total[src];
                    else if (auto it = dests.find(b.inst.nodes[i].id); it != dests.end())
                        rhs = -it->second;
                    b.row("bal(" + sk + "|" + b.nkey(i) + ")" + ps, Relation::Equal, rhs, c);
                }
            }
            for (int a = 0; a < A; ++a) {
                std::vector<std::pair<int, double>> c{{fv.link_flow[a], -1.0}};
                for (auto& col : fv.fs) c.push_back({col[a], 1.0});
                b.row("linkflow(" + b.akey(a, sigma) + ")", Relation::Equal, 0.0, c);
            }
            break;
        }
        case RoutingScheme::PerPath: {
            const std::map<int, std::vector<std::vector<int>>>* paths = &scheme.demand_paths;
            if (!shared_routing) {
                fv.xp.assign(D, {});
                for (int d = 0; d < D; ++d) {
                    auto it = paths->find(d);
                    if (it == paths->end() || it->second.empty())
                        throw Error("per-path scheme: demand " + std::to_string(d) +
                                    " has no candidate paths");
                    std::vector<std::pair<int, double>> pick;
                    for (size_t p = 0; p < it->second.size(); ++p) {
                        check_path(b, d, it->second[p]);
                        std::string key =
                            "d" + std::to_string(d) + "|p" + std::to_string(p) + ps;
                        int v = scheme.binary_paths ? b.binary("xp", key, 0.0)
                                                    : b.var("xp", key, 0.0, 1.0, 0.0);
                        fv.xp[d].push_back(v);
                        pick.push_back({v, 1.0});
                    }
                    b.row("pick(d" + std::to_string(d) + ")" + ps, Relation::Equal, 1.0, pick);
                }
            } else {
                fv.xp = shared_routing->xp;
            }
            const auto& xp = shared_routing ? shared_routing->xp : fv.xp;
            for (int a = 0; a < A; ++a) {
                std::vector<std::pair<int, double>> c{{fv.link_flow[a], -1.0}};
                for (int d = 0; d < D; ++d) {
                    auto it = paths->find(d);
                    for (size_t p = 0; p < it->second.size(); ++p)
                        for (int pa : it->second[p])
                            if (pa == a) c.push_back({xp[d][p], rate(d)});
                }
                b.row("linkflow(" + b.akey(a, sigma) + ")", Relation::LessEqual, 0.0, c);
            }
            break;
        }
        case RoutingScheme::SinglePath: {
            if (!shared_routing) {
                fv.fd.assign(D, {});
                for (int d = 0; d < D; ++d) {
                    fv.fd[d].resize(A);
                    std::string dk = "d" + std::to_string(d);
                    for (int a = 0; a < A; ++a)
                        fv.fd[d][a] = b.binary("x", b.akey(a, sigma) + "|" + dk, 0.0);
                    int o = b.topo.node(b.inst.demands[d].origin);
                    int t = b.topo.node(b.inst.demands[d].destination);
                    for (int i = 0; i < V; ++i) {
                        std::vector<std::pair<int, double>> c;
                        for (int a : b.topo.out_arcs[i]) c.push_back({fv.fd[d][a], 1.0});
                        for (int a : b.topo.in_arcs[i]) c.push_back({fv.fd[d][a], -1.0});
                        double rhs = i == o ? 1.0 : (i == t ? -1.0 : 0.0);
                        b.row("bal(" + dk + "|" + b.nkey(i) + ")" + ps, Relation::Equal, rhs, c);
                    }
                }
            } else {
                fv.fd = shared_routing->fd;
            }
            const auto& x = shared_routing ? shared_routing->fd : fv.fd;
            for (int a = 0; a < A; ++a) {
                std::vector<std::pair<int, double>> c{{fv.link_flow[a], -1.0}};
                for (int d = 0; d < D; ++d) c.push_back({x[d][a], rate(d)});
                b.row("linkflow(" + b.akey(a, sigma) + ")", Relation::Equal, 0.0, c);
            }
            break;
        }
    }

    if (with_node_flow) {
        fv.node_flow.resize(V);
        for (int i = 0; i < V; ++i)
            fv.node_flow[i] = b.var("fn", b.nkey(i, sigma), 0.0, kInf, 0.0);
        for (int i = 0; i < V; ++i) {
            double originated = 0.0;
            for (int d = 0; d < D; ++d)
                if (b.topo.node(b.inst.demands[d].origin) == i) originated += rate(d);
            std::vector<std::pair<int, double>> c{{fv.node_flow[i], -1.0}};
            for (int a : b.topo.in_arcs[i]) c.push_back({fv.link_flow[a], 1.0});
            b.row("nodeflow(" + b.nkey(i, sigma) + ")", Relation::Equal, -originated, c);
        }
    }
    return fv;
}

struct StateVars {
    std::vector<int> w;                 // link state: binary / integer cards
    std::vector<std::vector<int>> we;   // [a][e] config binaries (alr)
    std::vector<int> y;                 // node state; empty when nodes stay on
};

// Device-state variables, capacity rows, coherence rows and the fixed-power
// objective for one period.
inline StateVars emit_energy(Build& b, const FlowVars& fv, const EnergyOptions& opt, int sigma) {
    const int A = int(b.topo.arcs.size());
    const int V = b.topo.num_nodes;
    StateVars sv;
    if (opt.alr) {
        if (opt.bundled) throw Error("bundled and alr are mutually exclusive");
        for (const LinkSpec& l : b.inst.links)
            if (l.rate_configs.empty())
                throw Error("alr requires rate_configs on every link (missing on " + arc_key(l) +
                            ")");
    }
    if (opt.sleep_nodes && !(opt.sleep_links || opt.alr))
        throw Error("sleeping nodes require sleepable links or alr configs");

    // Link states and capacity.
    for (int a = 0; a < A; ++a) {
        const LinkSpec& l = b.inst.links[a];
        double mc = l.max_utilization * l.card_capacity;
        if (opt.alr) {
            std::vector<std::pair<int, double>> one, cap{{fv.link_flow[a], 1.0}};
            sv.we.emplace_back();
            for (size_t e = 0; e < l.rate_configs.size(); ++e) {
                int v = b.binary("we", b.akey(a, sigma) + "|e" + std::to_string(e),
                                 l.rate_configs[e].power);
                sv.we.back().push_back(v);
                one.push_back({v, 1.0});
                cap.push_back({v, -l.max_utilization * l.rate_configs[e].capacity});
            }
            b.row("onecfg(" + b.akey(a, sigma) + ")", Relation::Equal, 1.0, one);
            b.row("cap(" + b.akey(a, sigma) + ")", Relation::LessEqual, 0.0, cap);
        } else if (opt.sleep_links) {
            int w = opt.bundled && l.num_cards > 1
                        ? b.integer("w", b.akey(a, sigma), 0.0, l.num_cards, l.fixed_power)
                        : b.binary("w", b.akey(a, sigma), l.fixed_power);
            sv.w.push_back(w);
            b.row("cap(" + b.akey(a, sigma) + ")", Relation::LessEqual, 0.0,
                  {{fv.link_flow[a], 1.0}, {w, -mc}});
        } else {
            b.add_constant(l.rate_configs.empty() ? l.fixed_power * l.num_cards
                                                  : l.rate_configs.back().power);
            b.row("cap(" + b.akey(a, sigma) + ")", Relation::LessEqual, link_capacity(l),
                  {{fv.link_flow[a], 1.0}});
        }
        b.attach_load_cost(fv.link_flow[a], b.akey(a, sigma), l.per_unit_power, l.piecewise);
    }

    // Node states and coherence.
    if (opt.sleep_nodes) {
        sv.y.resize(V);
        for (int i = 0; i < V; ++i)
            sv.y[i] = b.binary("y", b.nkey(i, sigma), b.inst.nodes[i].fixed_power);
        if (opt.use_big_m_coherence && !opt.alr) {
            for (int i = 0; i < V; ++i) {
                std::vector<std::pair<int, double>> c;
                double m = 0.0;
                for (int a : b.topo.out_arcs[i]) {
                    c.push_back({sv.w[a], 1.0});
                    m += b.inst.links[a].num_cards;
                }
                for (int a : b.topo.in_arcs[i]) {
                    c.push_back({sv.w[a], 1.0});
                    m += b.inst.links[a].num_cards;
                }
                if (c.empty()) continue;
                c.push_back({sv.y[i], -m});
                b.row("cohm(" + b.nkey(i, sigma) + ")", Relation::LessEqual, 0.0, c);
            }
        } else if (opt.alr) {
            for (int a = 0; a < A; ++a) {
                const LinkSpec& l = b.inst.links[a];
                std::vector<std::pair<int, double>> on;
                for (size_t e = 0; e < l.rate_configs.size(); ++e)
                    if (l.rate_configs[e].capacity != 0.0) on.push_back({sv.we[a][e], 1.0});
                auto tail = on;
                on.push_back({sv.y[b.topo.arcs[a].first], -1.0});
                b.row("coh_i(" + b.akey(a, sigma) + ")", Relation::LessEqual, 0.0, on);
                tail.push_back({sv.y[b.topo.arcs[a].second], -1.0});
                b.row("coh_j(" + b.akey(a, sigma) + ")", Relation::LessEqual, 0.0, tail);
            }
        } else {
            for (int a = 0; a < A; ++a) {
                double n = b.inst.links[a].num_cards;
                b.row("coh_i(" + b.akey(a, sigma) + ")", Relation::LessEqual, 0.0,
                      {{sv.w[a], 1.0}, {sv.y[b.topo.arcs[a].first], -n}});
                b.row("coh_j(" + b.akey(a, sigma) + ")", Relation::LessEqual, 0.0,
                      {{sv.w[a], 1.0}, {sv.y[b.topo.arcs[a].second], -n}});
            }
        }
    } else {
        for (int i = 0; i < V; ++i) b.add_constant(b.inst.nodes[i].fixed_power);
    }
    if (!fv.node_flow.empty())
        for (int i = 0; i < V; ++i)
            b.attach_load_cost(fv.node_flow[i], b.nkey(i, sigma), b.inst.nodes[i].per_unit_power,
                             b.inst.nodes[i].piecewise);
    return sv;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// build_routing_model: pure routing, every device on
// ---------------------------------------------------------------------------

inline BuildResult build_routing_model(const Instance& inst, const RoutingScheme& scheme,
                                       bool linear_costs_only = false) {
    detail::Build b(inst);
    if (inst.multi_period())
        throw Error("routing model is single-period; use build_multiperiod_model");
    if (linear_costs_only) {
        for (const NodeSpec& n : inst.nodes)
            if (!n.piecewise.empty()) throw Error("linear costs requested but node " + n.id +
                                                  " has a piecewise profile");
        for (const LinkSpec& l : inst.links)
            if (!l.piecewise.empty()) throw Error("linear costs requested but link " +
                                                  arc_key(l) + " has a piecewise profile");
    }
    detail::FlowVars fv = detail::emit_flows(b, scheme, -1, true, nullptr);
    EnergyOptions all_on;
    all_on.sleep_links = false;
    all_on.sleep_nodes = false;
    detail::emit_energy(b, fv, all_on, -1);
    return std::move(b.out);
}

// ---------------------------------------------------------------------------
// build_energy_model: sleeping devices
// ---------------------------------------------------------------------------

inline BuildResult build_energy_model(const Instance& inst, const RoutingScheme& scheme,
                                      const EnergyOptions& options) {
    detail::Build b(inst);
    if (inst.multi_period())
        throw Error("energy model is single-period; use build_multiperiod_model");
    detail::FlowVars fv = detail::emit_flows(b, scheme, -1, true, nullptr);
    detail::emit_energy(b, fv, options, -1);
    return std::move(b.out);
}

// ---------------------------------------------------------------------------
// build_protection_model: single-path routing with a link-disjoint backup
// ---------------------------------------------------------------------------

inline BuildResult build_protection_model(const Instance& inst, ProtectionMode mode) {
    if (mode == ProtectionMode::None) throw Error("protection mode must not be none");
    detail::Build b(inst);
    if (inst.multi_period()) throw Error("protection model is single-period");
    const int A = int(b.topo.arcs.size());
    const int V = b.topo.num_nodes;
    const int D = int(b.inst.demands.size());
    bool smart = mode == ProtectionMode::SmartDedicated || mode == ProtectionMode::SmartShared;
    bool shared = mode == ProtectionMode::Shared || mode == ProtectionMode::SmartShared;

    // Primary paths: single-path binaries with conservation (emit_flows) and
    // the reserved-bandwidth variable f per arc. The linkflow rows emitted
    // here only tie f to primaries for the dedicated scheme; they are
    // replaced below, so request raw pieces instead of calling emit_flows.
    std::vector<std::vector<int>> x(D), xi(D);
    for (int d = 0; d < D; ++d) {
        std::string dk = "d" + std::to_string(d);
        x[d].resize(A);
        xi[d].resize(A);
        for (int a = 0; a < A; ++a) {
            x[d][a] = b.binary("x", b.akey(a) + "|" + dk, 0.0);
            xi[d][a] = b.binary("xi", b.akey(a) + "|" + dk, 0.0);
        }
        int o = b.topo.node(b.inst.demands[d].origin);
        int t = b.topo.node(b.inst.demands[d].destination);
        for (int i = 0; i < V; ++i) {
            double rhs = i == o ? 1.0 : (i == t ? -1.0 : 0.0);
            std::vector<std::pair<int, double>> cp, cb;
            for (int a : b.topo.out_arcs[i]) {
                cp.push_back({x[d][a], 1.0});
                cb.push_back({xi[d][a], 1.0});
            }
            for (int a : b.topo.in_arcs[i]) {
                cp.push_back({x[d][a], -1.0});
                cb.push_back({xi[d][a], -1.0});
            }
            b.row("bal(" + dk + "|" + b.nkey(i) + ")", Relation::Equal, rhs, cp);
            b.row("bbal(" + dk + "|" + b.nkey(i) + ")", Relation::Equal, rhs, cb);
        }
        // Link-disjointness on both orientations.
        for (int a = 0; a < A; ++a) {
            b.row("disj(" + b.akey(a) + "|" + dk + ")", Relation::LessEqual, 1.0,
                  {{x[d][a], 1.0}, {xi[d][a], 1.0}});
            auto [u, v] = b.topo.arcs[a];
            for (int ra : b.topo.out_arcs[v])
                if (b.topo.arcs[ra].second == u)
                    b.row("disjr(" + b.akey(a) + "|" + dk + ")", Relation::LessEqual, 1.0,
                          {{x[d][a], 1.0}, {xi[d][ra], 1.0}});
        }
    }

    std::vector<int> f(A);
    for (int a = 0; a < A; ++a) f[a] = b.var("f", b.akey(a), 0.0, kInf, 0.0);

    auto rate = [&](int d) { return b.inst.demands[d].rate; };

    if (!shared) {
        for (int a = 0; a < A; ++a) {
            std::vector<std::pair<int, double>> c{{f[a], -1.0}};
            for (int d = 0; d < D; ++d) {
                c.push_back({x[d][a], rate(d)});
                c.push_back({xi[d][a], rate(d)});
            }
            b.row("dim(" + b.akey(a) + ")", Relation::Equal, 0.0, c);
        }
    } else {
        // g(a|k|d) = demand d uses arc a on its primary and arc k on its
        // backup; the worst single failure sizes f.
        std::vector<std::vector<std::vector<int>>> g(A,
            std::vector<std::vector<int>>(A, std::vector<int>(D, -1)));
        for (int a = 0; a < A; ++a)
            for (int k = 0; k < A; ++k) {
                if (a == k) continue;
                for (int d = 0; d < D; ++d) {
                    std::string key = b.akey(a) + "|" + b.akey(k) + "|d" + std::to_string(d);
                    g[a][k][d] = b.binary("g", key, 0.0);
                    b.row("glink(" + key + ")", Relation::LessEqual, 1.0,
                          {{x[d][a], 1.0}, {xi[d][k], 1.0}, {g[a][k][d], -1.0}});
                }
            }
        for (int a = 0; a < A; ++a)
            for (int k = 0; k < A; ++k) {
                if (a == k) continue;  // the failed arc carries nothing
                std::vector<std::pair<int, double>> c{{f[a], -1.0}};
                for (int d = 0; d < D; ++d) {
                    c.push_back({x[d][a], rate(d)});
                    c.push_back({g[k][a][d], rate(d)});  // primary on k, backup on a
                }
                b.row("scap(" + b.akey(a) + "|" + b.akey(k) + ")", Relation::LessEqual, 0.0, c);
            }
    }

    // Device states. Classic: real sleep states sized by the reservation.
    // Smart: devices wake on demand, the objective charges primary carriers.
    if (!smart) {
        for (int a = 0; a < A; ++a) {
            const LinkSpec& l = b.inst.links[a];
            double mc = l.max_utilization * l.card_capacity;
            int w = l.num_cards > 1 ? b.integer("w", b.akey(a), 0.0, l.num_cards, l.fixed_power)
                                    : b.binary("w", b.akey(a), l.fixed_power);
            b.row("cap(" + b.akey(a) + ")", Relation::LessEqual, 0.0, {{f[a], 1.0}, {w, -mc}});
            b.attach_load_cost(f[a], b.akey(a), l.per_unit_power, l.piecewise);
        }
        for (int i = 0; i < V; ++i) b.binary("y", b.nkey(i), b.inst.nodes[i].fixed_power);
        for (int a = 0; a < A; ++a) {
            double n = b.inst.links[a].num_cards;
            int w = b.out.model.lp.variable_index("w(" + b.akey(a) + ")");
            int yi = b.out.model.lp.variable_index("y(" + b.nkey(b.topo.arcs[a].first) + ")");
            int yj = b.out.model.lp.variable_index("y(" + b.nkey(b.topo.arcs[a].second) + ")");
            b.row("coh_i(" + b.akey(a) + ")", Relation::LessEqual, 0.0, {{w, 1.0}, {yi, -n}});
            b.row("coh_j(" + b.akey(a) + ")", Relation::LessEqual, 0.0, {{w, 1.0}, {yj, -n}});
        }
    } else {
        std::vector<int> fp(A), wp(A), yp(V);
        for (int a = 0; a < A; ++a) {
            const LinkSpec& l = b.inst.links[a];
            double mc = l.max_utilization * l.card_capacity;
            fp[a] = b.var("fp", b.akey(a), 0.0, kInf, 0.0);
            std::vector<std::pair<int, double>> c{{fp[a], -1.0}};
            for (int d = 0; d < D; ++d) c.push_back({x[d][a], rate(d)});
            b.row("pdim(" + b.akey(a) + ")", Relation::Equal, 0.0, c);
            wp[a] = l.num_cards > 1 ? b.integer("wp", b.akey(a), 0.0, l.num_cards, l.fixed_power)
                                    : b.binary("wp", b.akey(a), l.fixed_power);
            b.row("pcap(" + b.akey(a) + ")", Relation::LessEqual, 0.0, {{fp[a], 1.0}, {wp[a], -mc}});
            // physical headroom for the worst failure
            b.row("cap(" + b.akey(a) + ")", Relation::LessEqual,
                  mc * l.num_cards, {{f[a], 1.0}});
            b.attach_load_cost(fp[a], b.akey(a), l.per_unit_power, l.piecewise);
        }
        for (int i = 0; i < V; ++i) yp[i] = b.binary("yp", b.nkey(i), b.inst.nodes[i].fixed_power);
        for (int a = 0; a < A; ++a) {
            double n = b.inst.links[a].num_cards;
            b.row("coh_i(" + b.akey(a) + ")", Relation::LessEqual, 0.0,
                  {{wp[a], 1.0}, {yp[b.topo.arcs[a].first], -n}});
            b.row("coh_j(" + b.akey(a) + ")", Relation::LessEqual, 0.0,
                  {{wp[a], 1.0}, {yp[b.topo.arcs[a].second], -n}});
        }
    }
    return std::move(b.out);
}

// ---------------------------------------------------------------------------
// build_multiperiod_model
// ---------------------------------------------------------------------------

inline BuildResult build_multiperiod_model(const Instance& inst, const RoutingScheme& scheme,
                                           const EnergyOptions& options, bool fixed_routing) {
    if (!inst.multi_period()) throw Error("multi-period model needs instance.periods");
    if (options.alr) throw Error("alr is not supported in the multi-period model");
    detail::Build b(inst);
    const int A = int(b.topo.arcs.size());
    const int V = b.topo.num_nodes;
    const int S = b.num_periods;

    detail::FlowVars shared;
    if (fixed_routing) {
        // Routing variables are created once, without per-period suffixes;
        // dimensioning against each period's rates happens inside the loop.
        // Per-flow demands become unit flows so one split serves all rates.
        const int D = int(b.inst.demands.size());
        switch (scheme.kind) {
            case RoutingScheme::PerSource:
                throw Error("fixed routing is not defined for the per-source scheme");
            case RoutingScheme::PerFlow:
            case RoutingScheme::SinglePath: {
                bool unit_caps = scheme.kind == RoutingScheme::PerFlow;
                shared.fd.assign(D, {});
                for (int d = 0; d < D; ++d) {
                    shared.fd[d].resize(A);
                    std::string dk = "d" + std::to_string(d);
                    for (int a = 0; a < A; ++a)
                        shared.fd[d][a] = unit_caps
                                              ? b.var("fd", b.akey(a) + "|" + dk, 0.0, 1.0, 0.0)
                                              : b.binary("x", b.akey(a) + "|" + dk, 0.0);
                    int o = b.topo.node(b.inst.demands[d].origin);
                    int t = b.topo.node(b.inst.demands[d].destination);
                    for (int i = 0; i < V; ++i) {
                        std::vector<std::pair<int, double>> c;
                        for (int a : b.topo.out_arcs[i]) c.push_back({shared.fd[d][a], 1.0});
                        for (int a : b.topo.in_arcs[i]) c.push_back({shared.fd[d][a], -1.0});
                        double rhs = i == o ? 1.0 : (i == t ? -1.0 : 0.0);
                        b.row("bal(" + dk + "|" + b.nkey(i) + ")", Relation::Equal, rhs, c);
                    }
                }
                break;
            }
            case RoutingScheme::PerPath: {
                shared.xp.assign(D, {});
                for (int d = 0; d < D; ++d) {
                    auto it = scheme.demand_paths.find(d);
                    if (it == scheme.demand_paths.end() || it->second.empty())
                        throw Error("per-path scheme: demand " + std::to_string(d) +
                                    " has no candidate paths");
                    std::vector<std::pair<int, double>> pick;
                    for (size_t p = 0; p < it->second.size(); ++p) {
                        detail::check_path(b, d, it->second[p]);
                        std::string key = "d" + std::to_string(d) + "|p" + std::to_string(p);
                        int v = scheme.binary_paths ? b.binary("xp", key, 0.0)
                                                    : b.var("xp", key, 0.0, 1.0, 0.0);
                        shared.xp[d].push_back(v);
                        pick.push_back({v, 1.0});
                    }
                    b.row("pick(d" + std::to_string(d) + ")", Relation::Equal, 1.0, pick);
                }
                break;
            }
        }
    }

    std::vector<detail::StateVars> states(S);
    std::vector<std::vector<int>> y_by_period;
    std::vector<std::vector<int>> w_by_period;
    for (int sigma = 0; sigma < S; ++sigma) {
        detail::FlowVars fv =
            detail::emit_flows(b, scheme, sigma, true, fixed_routing ? &shared : nullptr);
        states[sigma] = detail::emit_energy(b, fv, options, sigma);
        w_by_period.push_back(states[sigma].w);
        y_by_period.push_back(states[sigma].y);
    }

    // Reactivation energy for chassis, cyclic over the horizon.
    double delta = inst.reactivation_fraction;
    if (options.sleep_nodes && delta > 0.0) {
        for (int i = 0; i < V; ++i) {
            double pi = inst.nodes[i].fixed_power;
            if (pi == 0.0) continue;
            for (int sigma = 0; sigma < S; ++sigma) {
                int prev = (sigma + S - 1) % S;
                int z = b.var("z", b.nkey(i, sigma), 0.0, kInf, 1.0);
                b.row("zrow(" + b.nkey(i, sigma) + ")", Relation::GreaterEqual, 0.0,
                      {{z, 1.0},
                       {y_by_period[sigma][i], -delta * pi},
                       {y_by_period[prev][i], delta * pi}});
            }
        }
    }

    // Per-card reactivation limit; vacuous when eta_on covers every period.
    if (options.sleep_links && inst.max_reactivations < S) {
        for (int a = 0; a < A; ++a) {
            int n = inst.links[a].num_cards;
            std::vector<std::vector<int>> u(n);
            for (int k = 0; k < n; ++k) {
                for (int sigma = 0; sigma < S; ++sigma) {
                    u[k].push_back(
                        b.binary("u", b.akey(a) + "|k" + std::to_string(k) + b.period_suffix(sigma),
                                 0.0));
                }
                std::vector<std::pair<int, double>> cap;
                for (int sigma = 0; sigma < S; ++sigma) cap.push_back({u[k][sigma], 1.0});
                b.row("ucap(" + b.akey(a) + "|k" + std::to_string(k) + ")", Relation::LessEqual,
                      double(inst.max_reactivations), cap);
            }
            for (int sigma = 0; sigma < S; ++sigma) {
                int prev = (sigma + S - 1) % S;
                std::vector<std::pair<int, double>> c;
                for (int k = 0; k < n; ++k) c.push_back({u[k][sigma], 1.0});
                c.push_back({w_by_period[sigma][a], -1.0});
                c.push_back({w_by_period[prev][a], 1.0});
                b.row("urow(" + b.akey(a, sigma) + ")", Relation::GreaterEqual, 0.0, c);
            }
        }
    }
    return std::move(b.out);
}

// ---------------------------------------------------------------------------
// build_sp_ecmp_model: weight-driven shortest-path routing with ECMP splits
// ---------------------------------------------------------------------------

inline BuildResult build_sp_ecmp_model(const Instance& inst) {
    detail::Build b(inst);
    if (inst.multi_period()) throw Error("sp_ecmp model is single-period");
    for (const LinkSpec& l : inst.links) {
        if (l.num_cards != 1)
            throw Error("sp_ecmp model assumes single-card links (found bundle on " +
                        arc_key(l) + ")");
        if (!l.rate_configs.empty())
            throw Error("sp_ecmp model does not support rate configs");
    }
    const int A = int(b.topo.arcs.size());
    const int V = b.topo.num_nodes;
    const int D = int(b.inst.demands.size());
    double omega_max = inst.omega_max;
    double M = inst.big_m > 0.0 ? inst.big_m : omega_max * V;
    double longest = omega_max * std::max(V - 1, 1);
    if (M < longest)
        b.out.warnings.push_back(
            "big_m " + std::to_string(M) + " is below omega_max * (|V|-1) = " +
            std::to_string(longest) + "; optimal weight settings may be cut off");

    // Destination-aggregated flows.
    std::set<int> dest_set;
    for (const Demand& d : inst.demands) dest_set.insert(b.topo.node(d.destination));
    std::vector<int> dests(dest_set.begin(), dest_set.end());
    std::map<int, double> dest_rate;  // R^t
    for (int d = 0; d < D; ++d)
        dest_rate[b.topo.node(inst.demands[d].destination)] += inst.demands[d].rate;

    std::vector<int> f(A);
    for (int a = 0; a < A; ++a) f[a] = b.var("f", b.akey(a), 0.0, kInf, 0.0);
    std::map<int, std::vector<int>> ft;  // dest -> per arc
    for (int t : dests) {
        std::string tk = "t:" + inst.nodes[t].id;
        auto& col = ft[t];
        col.resize(A);
        for (int a = 0; a < A; ++a)
            col[a] = b.var("ft", b.akey(a) + "|" + tk, 0.0, kInf, 0.0);
        for (int i = 0; i < V; ++i) {
            if (i == t) continue;
            double supply = 0.0;
            for (int d = 0; d < D; ++d)
                if (b.topo.node(inst.demands[d].origin) == i &&
                    b.topo.node(inst.demands[d].destination) == t)
                    supply += inst.demands[d].rate;
            std::vector<std::pair<int, double>> c;
            for (int a : b.topo.out_arcs[i]) c.push_back({col[a], 1.0});
            for (int a : b.topo.in_arcs[i]) c.push_back({col[a], -1.0});
            b.row("bal(" + tk + "|" + b.nkey(i) + ")", Relation::Equal, supply, c);
        }
    }
    for (int a = 0; a < A; ++a) {
        std::vector<std::pair<int, double>> c{{f[a], -1.0}};
        for (int t : dests) c.push_back({ft[t][a], 1.0});
        b.row("linkflow(" + b.akey(a) + ")", Relation::Equal, 0.0, c);
    }
    detail::FlowVars fv;
    fv.link_flow = f;
    fv.node_flow.resize(V);
    {
        std::map<int, double> originated;
        for (int d = 0; d < D; ++d) originated[b.topo.node(inst.demands[d].origin)] +=
            inst.demands[d].rate;
        for (int i = 0; i < V; ++i) {
            fv.node_flow[i] = b.var("fn", b.nkey(i), 0.0, kInf, 0.0);
            std::vector<std::pair<int, double>> c{{fv.node_flow[i], -1.0}};
            for (int a : b.topo.in_arcs[i]) c.push_back({f[a], 1.0});
            double orig = originated.count(i) ? originated[i] : 0.0;
            b.row("nodeflow(" + b.nkey(i) + ")", Relation::Equal, -orig, c);
        }
    }
    EnergyOptions opt;  // binary sleeping links and nodes, pairwise coherence
    detail::StateVars sv = detail::emit_energy(b, fv, opt, -1);

    // Weights and the shortest-path machinery.
    std::vector<int> omega(A);
    for (int a = 0; a < A; ++a) {
        omega[a] = b.var("omega", b.akey(a), 1.0, omega_max, 0.0);
        b.row("omega_lo(" + b.akey(a) + ")", Relation::GreaterEqual, omega_max,
              {{omega[a], 1.0}, {sv.w[a], omega_max}});
    }
    for (int t : dests) {
        std::string tk = "t:" + inst.nodes[t].id;
        double big_r = dest_rate[t];
        std::vector<int> ell(V), zc(V, -1);
        for (int i = 0; i < V; ++i)
            ell[i] = b.var("ell", b.nkey(i) + "|" + tk, 0.0, kInf, 0.0);
        for (int i = 0; i < V; ++i) {
            if (b.topo.out_arcs[i].empty()) continue;
            zc[i] = b.var("zc", b.nkey(i) + "|" + tk, 0.0, kInf, 0.0);
        }
        for (int a = 0; a < A; ++a) {
            auto [i, j] = b.topo.arcs[a];
            std::string key = b.akey(a) + "|" + tk;
            int u = b.binary("usp", key, 0.0);
            // no traffic off shortest paths; equal share on them
            b.row("nf(" + key + ")", Relation::LessEqual, 0.0,
                  {{ft[t][a], 1.0}, {u, -big_r}});
            if (zc[i] >= 0) {
                b.row("cf_lo(" + key + ")", Relation::GreaterEqual, 0.0,
                      {{zc[i], 1.0}, {ft[t][a], -1.0}});
                b.row("cf_hi(" + key + ")", Relation::LessEqual, big_r,
                      {{zc[i], 1.0}, {ft[t][a], -1.0}, {u, big_r}});
            }
            // distance consistency: on a shortest arc the detour is zero,
            // off it the detour is at least one
            b.row("dist_lo(" + key + ")", Relation::GreaterEqual, 0.0,
                  {{ell[j], 1.0}, {omega[a], 1.0}, {ell[i], -1.0}});
            b.row("dist_hi(" + key + ")", Relation::LessEqual, M,
                  {{ell[j], 1.0}, {omega[a], 1.0}, {ell[i], -1.0}, {u, M}});
            b.row("dist_sep(" + key + ")", Relation::GreaterEqual, 1.0,
                  {{ell[j], 1.0}, {omega[a], 1.0}, {ell[i], -1.0}, {u, 1.0}});
            b.row("uw(" + key + ")", Relation::LessEqual, 0.0, {{u, 1.0}, {sv.w[a], -1.0}});
        }
    }
    return std::move(b.out);
}

// ---------------------------------------------------------------------------
// extract_solution: read a solved model back into a Solution
// ---------------------------------------------------------------------------

namespace detail {

// Follows selected arcs from origin to dest, erasing loops as it goes: the
// arc set of an integral unit flow is a simple path plus possibly cost-free
// cycles, and only the path matters.
inline std::vector<int> walk_path(const Topology& topo, std::vector<double> used, int origin,
                                  int dest) {
    std::vector<int> path;
    std::vector<int> nodes{origin};
    int at = origin;
    size_t steps = 0;
    while (at != dest) {
        if (++steps > 2 * topo.arcs.size() + 2)
            throw Error("path extraction: runaway walk");
        int next = -1;
        for (int a : topo.out_arcs[at])
            if (used[a] > 0.5) { next = a; break; }
        if (next < 0) throw Error("path extraction: no outgoing arc selected");
        used[next] = 0.0;  // consume the arc
        at = topo.arcs[next].second;
        path.push_back(next);
        auto seen = std::find(nodes.begin(), nodes.end(), at);
        if (seen != nodes.end()) {
            size_t keep = seen - nodes.begin();
            path.resize(keep);
            nodes.resize(keep + 1);
        } else {
            nodes.push_back(at);
        }
    }
    return path;
}

}  // namespace detail

struct VariantSpec {
    std::string id;  // routing | energy | protection.<mode> | multiperiod | sp_ecmp
    RoutingScheme scheme;
    EnergyOptions energy;
    ProtectionMode protection = ProtectionMode::None;
    bool fixed_routing = false;
};

inline Solution extract_solution(const Instance& inst, const VariantSpec& variant,
                                 const BuildResult& build, const std::vector<double>& values) {
    Topology topo = make_topology(inst);
    const int A = int(topo.arcs.size());
    const int V = topo.num_nodes;
    const int D = int(inst.demands.size());
    const int S = inst.multi_period() ? int(inst.periods.size()) : 1;
    const SymbolMap& sym = build.symbols;
    auto val = [&](const std::string& family, const std::string& key) {
        return values.at(build.model.lp.variable_index(sym.column(family, key)));
    };
    auto suffix = [&](int sigma) {
        return inst.multi_period() ? "@" + inst.periods.at(sigma) : "";
    };

    Solution sol;
    sol.variant = variant.id;
    sol.num_periods = S;
    bool smart = variant.protection == ProtectionMode::SmartDedicated ||
                 variant.protection == ProtectionMode::SmartShared;
    sol.smart = smart;
    sol.has_protection = variant.protection != ProtectionMode::None;
    sol.shared_backup = variant.protection == ProtectionMode::Shared ||
                        variant.protection == ProtectionMode::SmartShared;
    sol.alr = variant.energy.alr;
    sol.node_on.assign(S, std::vector<bool>(V, true));
    sol.link_state.assign(S, std::vector<int>(A, 0));

    for (int sigma = 0; sigma < S; ++sigma) {
        std::string ps = suffix(sigma);
        for (int a = 0; a < A; ++a) {
            const LinkSpec& l = inst.links[a];
            std::string ak = arc_key(l) + ps;
            if (sol.alr) {
                int chosen = 0;
                for (size_t e = 0; e < l.rate_configs.size(); ++e)
                    if (val("we", ak + "|e" + std::to_string(e)) > 0.5)
                        chosen = int(e);
                sol.link_state[sigma][a] = chosen;
            } else if (smart) {
                sol.link_state[sigma][a] = int(std::lround(val("wp", ak)));
            } else if (sym.has("w", ak)) {
                sol.link_state[sigma][a] = int(std::lround(val("w", ak)));
            } else {
                sol.link_state[sigma][a] = l.num_cards;  // routing model: all on
            }
        }
        for (int i = 0; i < V; ++i) {
            std::string nk = inst.nodes[i].id + ps;
            if (smart) sol.node_on[sigma][i] = val("yp", nk) > 0.5;
            else if (sym.has("y", nk)) sol.node_on[sigma][i] = val("y", nk) > 0.5;
        }
    }

    // Flows / paths per period.
    auto scheme_kind = variant.scheme.kind;
    if (variant.protection != ProtectionMode::None) scheme_kind = RoutingScheme::SinglePath;
    if (variant.id == "sp_ecmp") {
        sol.commodities = CommodityKind::PerDestination;
        std::set<std::string> dest_ids;
        for (const Demand& d : inst.demands) dest_ids.insert(d.destination);
        sol.flows.assign(1, {});
        for (const std::string& t : dest_ids) {
            sol.commodity_keys.push_back("t:" + t);
            std::vector<double> per_arc(A, 0.0);
            for (int a = 0; a < A; ++a)
                per_arc[a] = val("ft", arc_key(inst.links[a]) + "|t:" + t);
            sol.flows[0].push_back(std::move(per_arc));
        }
        std::vector<double> w(A);
        for (int a = 0; a < A; ++a) {
            double x = val("omega", arc_key(inst.links[a]));
            w[a] = std::round(x * 1e9) / 1e9;  // shed LP noise for tie tests
        }
        sol.weights = std::move(w);
    } else if (variant.protection != ProtectionMode::None) {
        sol.primary.assign(S, std::vector<std::vector<int>>(D));
        sol.backup.assign(S, std::vector<std::vector<int>>(D));
        for (int d = 0; d < D; ++d) {
            std::string dk = "|d" + std::to_string(d);
            std::vector<double> px(A), bx(A);
            for (int a = 0; a < A; ++a) {
                px[a] = val("x", arc_key(inst.links[a]) + dk);
                bx[a] = val("xi", arc_key(inst.links[a]) + dk);
            }
            int o = topo.node(inst.demands[d].origin);
            int t = topo.node(inst.demands[d].destination);
            sol.primary[0][d] = detail::walk_path(topo, px, o, t);
            sol.backup[0][d] = detail::walk_path(topo, bx, o, t);
        }
    } else {
        switch (scheme_kind) {
            case RoutingScheme::PerFlow: {
                sol.commodities = CommodityKind::PerDemand;
                sol.flows.assign(S, {});
                for (int d = 0; d < D; ++d)
                    sol.commodity_keys.push_back("d" + std::to_string(d));
                for (int sigma = 0; sigma < S; ++sigma) {
                    for (int d = 0; d < D; ++d) {
                        std::vector<double> per_arc(A, 0.0);
                        for (int a = 0; a < A; ++a) {
                            std::string key = variant.fixed_routing
                                                  ? arc_key(inst.links[a]) + "|d" + std::to_string(d)
                                                  : arc_key(inst.links[a]) + suffix(sigma) + "|d" +
                                                        std::to_string(d);
                            double raw = val("fd", key);
                            per_arc[a] = variant.fixed_routing
                                             ? raw * demand_rate(inst, inst.demands[d], sigma)
                                             : raw;
                        }
                        sol.flows[sigma].push_back(std::move(per_arc));
                    }
                }
                break;
            }
            case RoutingScheme::PerSource: {
                sol.commodities = CommodityKind::PerSource;
                sol.flows.assign(S, {});
                std::set<std::string> sources;
                for (const Demand& d : inst.demands) sources.insert(d.origin);
                for (const std::string& s : sources) sol.commodity_keys.push_back("s:" + s);
                for (int sigma = 0; sigma < S; ++sigma)
                    for (const std::string& s : sources) {
                        std::vector<double> per_arc(A, 0.0);
                        for (int a = 0; a < A; ++a)
                            per_arc[a] =
                                val("fs", arc_key(inst.links[a]) + suffix(sigma) + "|s:" + s);
                        sol.flows[sigma].push_back(std::move(per_arc));
                    }
                break;
            }
            case RoutingScheme::PerPath: {
                sol.commodities = CommodityKind::PerDemand;
                sol.flows.assign(S, {});
                for (int d = 0; d < D; ++d)
                    sol.commodity_keys.push_back("d" + std::to_string(d));
                for (int sigma = 0; sigma < S; ++sigma)
                    for (int d = 0; d < D; ++d) {
                        std::vector<double> per_arc(A, 0.0);
                        auto it = variant.scheme.demand_paths.find(d);
                        double r = inst.multi_period()
                                       ? demand_rate(inst, inst.demands[d], sigma)
                                       : inst.demands[d].rate;
                        std::string ps = variant.fixed_routing ? "" : suffix(sigma);
                        for (size_t p = 0; p < it->second.size(); ++p) {
                            double share = val(
                                "xp", "d" + std::to_string(d) + "|p" + std::to_string(p) + ps);
                            for (int a : it->second[p]) per_arc[a] += r * share;
                        }
                        sol.flows[sigma].push_back(std::move(per_arc));
                    }
                break;
            }
            case RoutingScheme::SinglePath: {
                sol.commodities = CommodityKind::PerDemand;
                sol.primary.assign(S, std::vector<std::vector<int>>(D));
                for (int sigma = 0; sigma < S; ++sigma)
                    for (int d = 0; d < D; ++d) {
                        std::vector<double> used(A, 0.0);
                        for (int a = 0; a < A; ++a) {
                            std::string key = variant.fixed_routing
                                                  ? arc_key(inst.links[a]) + "|d" + std::to_string(d)
                                                  : arc_key(inst.links[a]) + suffix(sigma) + "|d" +
                                                        std::to_string(d);
                            used[a] = val("x", key);
                        }
                        sol.primary[sigma][d] =
                            detail::walk_path(topo, used, topo.node(inst.demands[d].origin),
                                              topo.node(inst.demands[d].destination));
                    }
                break;
            }
        }
    }
    double obj = 0.0;
    for (size_t j = 0; j < values.size(); ++j)
        obj += build.model.lp.variables[j].objective * values[j];
    sol.total_power = obj;
    return sol;
}

}  // namespace eanm
