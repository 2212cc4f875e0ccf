// JSON (de)serialization for instances and solutions. Parsing is strict by
// default: unknown keys are errors unless the caller opts into lenient mode,
// where they are collected as warnings instead.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eanm/model.hpp"
#include "eanm/solution.hpp"

namespace eanm {

using Json = nlohmann::ordered_json;

namespace detail {

struct KeyGuard {
    const Json& obj;
    std::string where;
    bool strict;
    std::vector<std::string>* warnings;
    std::vector<std::string> known;

    void allow(std::initializer_list<const char*> keys) {
        for (const char* k : keys) known.push_back(k);
    }

    void finish() const {
        if (!obj.is_object()) return;
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
            std::string msg = where + ": unknown key '" + it.key() + "'";
            if (strict) throw Error(msg);
            if (warnings) warnings->push_back(msg);
        }
    }
};

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

inline std::vector<PowerSegment> parse_piecewise(const Json& j, const std::string& where) {
    std::vector<PowerSegment> out;
    if (!j.is_array()) throw Error(where + ": piecewise must be an array");
    for (const Json& seg : j) {
        if (!seg.is_object() || !seg.contains("breakpoint") || !seg.contains("slope"))
            throw Error(where + ": piecewise entries need breakpoint and slope");
        out.push_back({seg.at("breakpoint").get<double>(), seg.at("slope").get<double>()});
    }
    return out;
}

}  // namespace detail

inline Instance parse_instance(const Json& j, bool strict = true,
                               std::vector<std::string>* warnings = nullptr) {
    if (!j.is_object()) throw Error("instance file: top level must be an object");
    detail::KeyGuard top{j, "instance", strict, warnings, {}};
    top.allow({"meta", "nodes", "links", "demands", "periods", "options"});
    top.finish();
    Instance in;
    if (j.contains("meta")) {
        const Json& m = j.at("meta");
        detail::KeyGuard g{m, "meta", strict, warnings, {}};
        g.allow({"name", "flow_unit"});
        g.finish();
        in.name = detail::get_or<std::string>(m, "name", "");
        in.flow_unit = detail::get_or<std::string>(m, "flow_unit", "Mbps");
    }
    if (!j.contains("nodes") || !j.contains("links") || !j.contains("demands"))
        throw Error("instance file: nodes, links and demands are required");
    for (const Json& n : j.at("nodes")) {
        detail::KeyGuard g{n, "node", strict, warnings, {}};
        g.allow({"id", "fixed_power", "per_unit_power", "piecewise"});
        g.finish();
        NodeSpec spec;
        if (!n.contains("id")) throw Error("node without id");
        spec.id = n.at("id").get<std::string>();
        spec.fixed_power = detail::get_or(n, "fixed_power", 0.0);
        spec.per_unit_power = detail::get_or(n, "per_unit_power", 0.0);
        if (n.contains("piecewise"))
            spec.piecewise = detail::parse_piecewise(n.at("piecewise"), "node " + spec.id);
        in.nodes.push_back(std::move(spec));
    }
    for (const Json& l : j.at("links")) {
        detail::KeyGuard g{l, "link", strict, warnings, {}};
        g.allow({"from", "to", "card_capacity", "num_cards", "max_utilization", "fixed_power",
                 "per_unit_power", "piecewise", "rate_configs", "weight"});
        g.finish();
        LinkSpec spec;
        if (!l.contains("from") || !l.contains("to")) throw Error("link without endpoints");
        spec.from = l.at("from").get<std::string>();
        spec.to = l.at("to").get<std::string>();
        spec.card_capacity = detail::get_or(l, "card_capacity", 0.0);
        spec.num_cards = detail::get_or(l, "num_cards", 1);
        spec.max_utilization = detail::get_or(l, "max_utilization", 1.0);
        spec.fixed_power = detail::get_or(l, "fixed_power", 0.0);
        spec.per_unit_power = detail::get_or(l, "per_unit_power", 0.0);
        if (l.contains("piecewise"))
            spec.piecewise = detail::parse_piecewise(l.at("piecewise"), "link " + arc_key(spec));
        if (l.contains("rate_configs")) {
            for (const Json& rc : l.at("rate_configs")) {
                detail::KeyGuard rg{rc, "rate_config", strict, warnings, {}};
                rg.allow({"capacity", "power"});
                rg.finish();
                spec.rate_configs.push_back(
                    {detail::get_or(rc, "capacity", 0.0), detail::get_or(rc, "power", 0.0)});
            }
        }
        if (l.contains("weight") && !l.at("weight").is_null())
            spec.weight = l.at("weight").get<double>();
        in.links.push_back(std::move(spec));
    }
    for (const Json& d : j.at("demands")) {
        detail::KeyGuard g{d, "demand", strict, warnings, {}};
        g.allow({"origin", "destination", "rate", "per_period_rates"});
        g.finish();
        Demand dem;
        if (!d.contains("origin") || !d.contains("destination"))
            throw Error("demand without endpoints");
        dem.origin = d.at("origin").get<std::string>();
        dem.destination = d.at("destination").get<std::string>();
        dem.rate = detail::get_or(d, "rate", 0.0);
        if (d.contains("per_period_rates"))
            for (auto it = d.at("per_period_rates").begin(); it != d.at("per_period_rates").end();
                 ++it)
                dem.per_period_rates[it.key()] = it.value().get<double>();
        in.demands.push_back(std::move(dem));
    }
    if (j.contains("periods"))
        for (const Json& p : j.at("periods")) in.periods.push_back(p.get<std::string>());
    if (j.contains("options")) {
        const Json& o = j.at("options");
        detail::KeyGuard g{o, "options", strict, warnings, {}};
        g.allow({"delta", "eta_on", "omega_max", "big_m"});
        g.finish();
        in.reactivation_fraction = detail::get_or(o, "delta", 0.0);
        in.max_reactivations = detail::get_or(o, "eta_on", 1000000);
        in.omega_max = detail::get_or(o, "omega_max", 100.0);
        in.big_m = detail::get_or(o, "big_m", 0.0);
    }
    return in;
}

inline Json serialize_instance(const Instance& in) {
    Json j;
    j["meta"] = {{"name", in.name}, {"flow_unit", in.flow_unit}};
    j["nodes"] = Json::array();
    for (const NodeSpec& n : in.nodes) {
        Json jn{{"id", n.id}, {"fixed_power", n.fixed_power},
                {"per_unit_power", n.per_unit_power}};
        if (!n.piecewise.empty()) {
            Json pw = Json::array();
            for (const PowerSegment& s : n.piecewise)
                pw.push_back({{"breakpoint", s.breakpoint}, {"slope", s.slope}});
            jn["piecewise"] = std::move(pw);
        }
        j["nodes"].push_back(std::move(jn));
    }
    j["links"] = Json::array();
    for (const LinkSpec& l : in.links) {
        Json jl{{"from", l.from},
                {"to", l.to},
                {"card_capacity", l.card_capacity},
                {"num_cards", l.num_cards},
                {"max_utilization", l.max_utilization},
                {"fixed_power", l.fixed_power},
                {"per_unit_power", l.per_unit_power}};
        if (!l.piecewise.empty()) {
            Json pw = Json::array();
            for (const PowerSegment& s : l.piecewise)
                pw.push_back({{"breakpoint", s.breakpoint}, {"slope", s.slope}});
            jl["piecewise"] = std::move(pw);
        }
        if (!l.rate_configs.empty()) {
            Json rcs = Json::array();
            for (const RateConfig& rc : l.rate_configs)
                rcs.push_back({{"capacity", rc.capacity}, {"power", rc.power}});
            jl["rate_configs"] = std::move(rcs);
        }
        if (l.weight) jl["weight"] = *l.weight;
        j["links"].push_back(std::move(jl));
    }
    j["demands"] = Json::array();
    for (const Demand& d : in.demands) {
        Json jd{{"origin", d.origin}, {"destination", d.destination}, {"rate", d.rate}};
        if (!d.per_period_rates.empty()) {
            Json pr;
            for (auto& [p, r] : d.per_period_rates) pr[p] = r;
            jd["per_period_rates"] = std::move(pr);
        }
        j["demands"].push_back(std::move(jd));
    }
    if (!in.periods.empty()) j["periods"] = in.periods;
    j["options"] = {{"delta", in.reactivation_fraction},
                    {"eta_on", in.max_reactivations},
                    {"omega_max", in.omega_max},
                    {"big_m", in.big_m}};
    return j;
}

inline Instance load_instance(const std::filesystem::path& path, bool strict = true,
                              std::vector<std::string>* warnings = nullptr) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read " + path.string());
    Json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return parse_instance(j, strict, warnings);
}

// ---------------------------------------------------------------------------
// Solution files
// ---------------------------------------------------------------------------

inline const char* to_string(CommodityKind k) {
    switch (k) {
        case CommodityKind::PerDemand: return "per_demand";
        case CommodityKind::PerSource: return "per_source";
        case CommodityKind::PerDestination: return "per_destination";
    }
    return "?";
}

inline Json serialize_solution(const Solution& sol) {
    Json j;
    j["variant"] = sol.variant;
    j["commodities"] = to_string(sol.commodities);
    j["alr"] = sol.alr;
    j["smart"] = sol.smart;
    j["shared_backup"] = sol.shared_backup;
    j["has_protection"] = sol.has_protection;
    j["num_periods"] = sol.num_periods;
    j["node_on"] = sol.node_on;
    j["link_state"] = sol.link_state;
    j["commodity_keys"] = sol.commodity_keys;
    j["flows"] = sol.flows;
    j["primary"] = sol.primary;
    j["backup"] = sol.backup;
    if (sol.weights) j["weights"] = *sol.weights;
    j["total_power"] = sol.total_power;
    return j;
}

inline Solution parse_solution(const Json& j) {
    Solution sol;
    sol.variant = j.at("variant").get<std::string>();
    std::string ck = j.at("commodities").get<std::string>();
    if (ck == "per_demand") sol.commodities = CommodityKind::PerDemand;
    else if (ck == "per_source") sol.commodities = CommodityKind::PerSource;
    else if (ck == "per_destination") sol.commodities = CommodityKind::PerDestination;
    else throw Error("solution file: unknown commodity kind " + ck);
    sol.alr = detail::get_or(j, "alr", false);
    sol.smart = detail::get_or(j, "smart", false);
    sol.shared_backup = detail::get_or(j, "shared_backup", false);
    sol.has_protection = detail::get_or(j, "has_protection", false);
    sol.num_periods = detail::get_or(j, "num_periods", 1);
    sol.node_on = j.at("node_on").get<std::vector<std::vector<bool>>>();
    sol.link_state = j.at("link_state").get<std::vector<std::vector<int>>>();
    if (j.contains("commodity_keys"))
        sol.commodity_keys = j.at("commodity_keys").get<std::vector<std::string>>();
    if (j.contains("flows"))
        sol.flows = j.at("flows").get<std::vector<std::vector<std::vector<double>>>>();
    if (j.contains("primary"))
        sol.primary = j.at("primary").get<std::vector<std::vector<std::vector<int>>>>();
    if (j.contains("backup"))
        sol.backup = j.at("backup").get<std::vector<std::vector<std::vector<int>>>>();
    if (j.contains("weights") && !j.at("weights").is_null())
        sol.weights = j.at("weights").get<std::vector<double>>();
    sol.total_power = detail::get_or(j, "total_power", 0.0);
    return sol;
}

inline Solution load_solution(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read " + path.string());
    Json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return parse_solution(j);
}

}  // namespace eanm
