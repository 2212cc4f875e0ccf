// Domain types for energy-aware network management instances: nodes and
// links with power profiles, traffic demands, and multi-period metadata.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eanm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One segment of a convex piecewise-linear power profile. `slope` applies
/// to the load interval ending at `breakpoint`; the last slope extends past
/// the last breakpoint. A single entry (c, s) is equivalent to a linear
/// profile with slope s.
struct PowerSegment {
    double breakpoint = 0.0;  // flow units
    double slope = 0.0;       // watts per flow unit
};

struct NodeSpec {
    std::string id;
    double fixed_power = 0.0;     // watts while the chassis is on
    double per_unit_power = 0.0;  // watts per flow unit (ignored if piecewise set)
    std::vector<PowerSegment> piecewise;
};

/// A link operating configuration: transmit at `capacity` for `power` watts.
/// Config lists always contain the (0, 0) sleep entry.
struct RateConfig {
    double capacity = 0.0;
    double power = 0.0;
};

struct LinkSpec {
    std::string from;
    std::string to;
    double card_capacity = 0.0;   // per-card capacity
    int num_cards = 1;
    double max_utilization = 1.0; // usable fraction of capacity
    double fixed_power = 0.0;     // watts per active card
    double per_unit_power = 0.0;
    std::vector<PowerSegment> piecewise;
    std::vector<RateConfig> rate_configs;  // empty unless the link is rate-adaptive
    std::optional<double> weight;          // initial routing weight
};

struct Demand {
    std::string origin;
    std::string destination;
    double rate = 0.0;
    std::map<std::string, double> per_period_rates;  // period id -> rate
};

struct Instance {
    std::string name;
    std::string flow_unit = "Mbps";
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::vector<Demand> demands;
    std::vector<std::string> periods;
    double reactivation_fraction = 0.0;  // extra chassis power fraction on wake-up
    int max_reactivations = 1000000;     // per-card cap over the horizon
    double omega_max = 100.0;            // largest admissible link weight
    double big_m = 0.0;                  // 0 = derive omega_max * |V| when needed

    bool multi_period() const { return !periods.empty(); }
};

// ---------------------------------------------------------------------------
// Index view over an instance. Built once by whoever needs arc/node lookups;
// the instance itself stays a dumb value type.
// ---------------------------------------------------------------------------

struct Topology {
    int num_nodes = 0;
    std::vector<std::pair<int, int>> arcs;   // (from, to) node indices
    std::vector<std::vector<int>> out_arcs;  // per node
    std::vector<std::vector<int>> in_arcs;
    std::map<std::string, int> node_index;

    int node(const std::string& id) const {
        auto it = node_index.find(id);
        if (it == node_index.end()) throw Error("unknown node id: " + id);
        return it->second;
    }
};

inline Topology make_topology(const Instance& inst) {
    Topology t;
    t.num_nodes = static_cast<int>(inst.nodes.size());
    for (int i = 0; i < t.num_nodes; ++i) {
        if (!t.node_index.emplace(inst.nodes[i].id, i).second)
            throw Error("duplicate node id: " + inst.nodes[i].id);
    }
    t.out_arcs.resize(t.num_nodes);
    t.in_arcs.resize(t.num_nodes);
    for (const LinkSpec& l : inst.links) {
        int u = t.node(l.from);
        int v = t.node(l.to);
        int a = static_cast<int>(t.arcs.size());
        t.arcs.emplace_back(u, v);
        t.out_arcs[u].push_back(a);
        t.in_arcs[v].push_back(a);
    }
    return t;
}

inline std::string arc_key(const LinkSpec& l) { return l.from + ">" + l.to; }

/// Effective usable capacity of a fully-on link.
inline double link_capacity(const LinkSpec& l) {
    if (!l.rate_configs.empty()) {
        double best = 0.0;
        for (const RateConfig& rc : l.rate_configs) best = std::max(best, rc.capacity);
        return l.max_utilization * best;
    }
    return l.max_utilization * l.card_capacity * l.num_cards;
}

inline double demand_rate(const Instance& inst, const Demand& d, int period) {
    if (!inst.multi_period()) return d.rate;
    auto it = d.per_period_rates.find(inst.periods.at(period));
    if (it == d.per_period_rates.end())
        throw Error("demand " + d.origin + ">" + d.destination + " lacks rate for period " +
                    inst.periods[period]);
    return it->second;
}

inline std::vector<double> period_rates(const Instance& inst, int period) {
    std::vector<double> r;
    r.reserve(inst.demands.size());
    for (const Demand& d : inst.demands) r.push_back(demand_rate(inst, d, period));
    return r;
}

// ---------------------------------------------------------------------------
// validate_instance
// ---------------------------------------------------------------------------

namespace detail {

inline void check_piecewise(const std::vector<PowerSegment>& pw, const std::string& who,
                            std::vector<std::string>& out) {
    for (size_t k = 0; k < pw.size(); ++k) {
        if (pw[k].slope < 0.0)
            out.push_back(who + ": piecewise slope " + std::to_string(k) + " is negative");
        if (k > 0) {
            if (pw[k].breakpoint <= pw[k - 1].breakpoint)
                out.push_back(who + ": piecewise breakpoints not strictly increasing at segment " +
                              std::to_string(k));
            if (pw[k].slope < pw[k - 1].slope)
                out.push_back(who + ": piecewise slopes decrease at segment " +
                              std::to_string(k) + " (profile must be convex)");
        } else if (pw[k].breakpoint <= 0.0) {
            out.push_back(who + ": first piecewise breakpoint must be positive");
        }
    }
}

}  // namespace detail

/// Checks every structural invariant. Returns an empty list iff the instance
/// is well formed; violations name the offending element.
inline std::vector<std::string> validate_instance(const Instance& inst) {
    std::vector<std::string> v;
    std::map<std::string, int> node_ids;
    for (size_t i = 0; i < inst.nodes.size(); ++i) {
        const NodeSpec& n = inst.nodes[i];
        std::string who = "node " + n.id;
        if (n.id.empty()) who = "node #" + std::to_string(i);
        if (n.id.empty()) v.push_back(who + ": empty id");
        if (!node_ids.emplace(n.id, 1).second) v.push_back(who + ": duplicate id");
        if (n.fixed_power < 0.0) v.push_back(who + ": fixed_power is negative");
        if (n.per_unit_power < 0.0) v.push_back(who + ": per_unit_power is negative");
        detail::check_piecewise(n.piecewise, who, v);
    }
    std::map<std::pair<std::string, std::string>, int> seen_arcs;
    for (size_t i = 0; i < inst.links.size(); ++i) {
        const LinkSpec& l = inst.links[i];
        std::string who = "link " + l.from + ">" + l.to;
        if (!node_ids.count(l.from)) v.push_back(who + ": unknown endpoint " + l.from);
        if (!node_ids.count(l.to)) v.push_back(who + ": unknown endpoint " + l.to);
        if (l.from == l.to) v.push_back(who + ": self-loop");
        if (!seen_arcs.emplace(std::make_pair(l.from, l.to), 1).second)
            v.push_back(who + ": duplicate arc");
        if (l.card_capacity < 0.0) v.push_back(who + ": card_capacity is negative");
        if (l.num_cards < 1) v.push_back(who + ": num_cards must be >= 1");
        if (!(l.max_utilization > 0.0 && l.max_utilization <= 1.0))
            v.push_back(who + ": max_utilization must be in (0,1]");
        if (l.fixed_power < 0.0) v.push_back(who + ": fixed_power is negative");
        if (l.per_unit_power < 0.0) v.push_back(who + ": per_unit_power is negative");
        if (l.weight && *l.weight <= 0.0) v.push_back(who + ": weight must be positive");
        detail::check_piecewise(l.piecewise, who, v);
        if (!l.rate_configs.empty()) {
            int sleep_entries = 0;
            for (size_t e = 0; e < l.rate_configs.size(); ++e) {
                const RateConfig& rc = l.rate_configs[e];
                if (rc.capacity < 0.0) v.push_back(who + ": config capacity is negative");
                if (rc.power < 0.0) v.push_back(who + ": config power is negative");
                if (rc.capacity == 0.0 && rc.power == 0.0) ++sleep_entries;
                if (e > 0 && rc.capacity <= l.rate_configs[e - 1].capacity)
                    v.push_back(who + ": config capacities not strictly increasing");
            }
            if (sleep_entries != 1)
                v.push_back(who + ": rate_configs must contain exactly one (0,0) sleep entry");
        }
    }
    for (size_t i = 0; i < inst.demands.size(); ++i) {
        const Demand& d = inst.demands[i];
        std::string who = "demand " + std::to_string(i);
        if (!node_ids.count(d.origin)) v.push_back(who + ": unknown origin " + d.origin);
        if (!node_ids.count(d.destination))
            v.push_back(who + ": unknown destination " + d.destination);
        if (d.origin == d.destination) v.push_back(who + ": origin equals destination");
        if (d.rate < 0.0) v.push_back(who + ": rate is negative");
        for (const auto& [p, r] : d.per_period_rates)
            if (r < 0.0) v.push_back(who + ": rate for period " + p + " is negative");
        if (inst.multi_period()) {
            for (const std::string& p : inst.periods)
                if (!d.per_period_rates.count(p))
                    v.push_back(who + ": missing rate for period " + p);
            for (const auto& [p, r] : d.per_period_rates)
                if (std::find(inst.periods.begin(), inst.periods.end(), p) == inst.periods.end())
                    v.push_back(who + ": rate for unknown period " + p);
        }
    }
    {
        std::map<std::string, int> period_ids;
        for (const std::string& p : inst.periods)
            if (!period_ids.emplace(p, 1).second) v.push_back("period " + p + ": duplicate id");
    }
    if (!(inst.reactivation_fraction >= 0.0 && inst.reactivation_fraction <= 1.0))
        v.push_back("instance: reactivation_fraction must be in [0,1]");
    if (inst.max_reactivations < 1) v.push_back("instance: max_reactivations must be >= 1");
    if (inst.omega_max < 1.0) v.push_back("instance: omega_max must be >= 1");
    if (inst.big_m < 0.0) v.push_back("instance: big_m must be >= 0");
    return v;
}

// ---------------------------------------------------------------------------
// evaluate_power
// ---------------------------------------------------------------------------

/// Load-proportional power term: integral of the (piecewise) slope from 0 to
/// `load`. Falls back to the linear slope when no segments are given.
inline double load_power_term(double load, double per_unit,
                              const std::vector<PowerSegment>& pw) {
    if (load < 0.0) throw Error("evaluate_power: negative load");
    if (pw.empty()) return per_unit * load;
    double watts = 0.0;
    double prev = 0.0;
    for (size_t k = 0; k < pw.size(); ++k) {
        double hi = (k + 1 == pw.size()) ? std::max(load, pw[k].breakpoint) : pw[k].breakpoint;
        double seg = std::min(load, hi) - prev;
        if (seg <= 0.0) break;
        watts += pw[k].slope * seg;
        prev += seg;
    }
    return watts;
}

inline double evaluate_power(const NodeSpec& n, double load, bool active) {
    if (!active) {
        if (load > 0.0)
            throw Error("node " + n.id + ": positive load while asleep");
        return 0.0;
    }
    return n.fixed_power + load_power_term(load, n.per_unit_power, n.piecewise);
}

/// Strong parameter types so bundled-card counts and ALR config indices
/// cannot be swapped at a call site.
struct CardCount {
    int value = 0;
};
struct ConfigIndex {
    int value = 0;
};

inline double evaluate_power(const LinkSpec& l, double load, CardCount cards) {
    if (cards.value < 0 || cards.value > l.num_cards)
        throw Error("link " + arc_key(l) + ": card count " + std::to_string(cards.value) +
                    " outside [0," + std::to_string(l.num_cards) + "]");
    if (cards.value == 0) {
        if (load > 0.0) throw Error("link " + arc_key(l) + ": positive load while asleep");
        return 0.0;
    }
    return l.fixed_power * cards.value + load_power_term(load, l.per_unit_power, l.piecewise);
}

inline double evaluate_power(const LinkSpec& l, double load, ConfigIndex config) {
    if (config.value < 0 || config.value >= static_cast<int>(l.rate_configs.size()))
        throw Error("link " + arc_key(l) + ": config index out of range");
    const RateConfig& rc = l.rate_configs[config.value];
    if (rc.capacity == 0.0 && load > 0.0)
        throw Error("link " + arc_key(l) + ": positive load on the sleep config");
    return rc.power;
}

// ---------------------------------------------------------------------------
// aggregate_per_source
// ---------------------------------------------------------------------------

struct SourceAggregate {
    double total = 0.0;                            // everything emitted by the source
    std::map<std::string, double> per_destination; // summed over same-pair demands
};

inline std::map<std::string, SourceAggregate> aggregate_per_source(const Instance& inst) {
    std::map<std::string, SourceAggregate> agg;
    for (const Demand& d : inst.demands) {
        SourceAggregate& sa = agg[d.origin];
        sa.total += d.rate;
        sa.per_destination[d.destination] += d.rate;
    }
    return agg;
}

}  // namespace eanm
