// Command-line front end: solve / heuristic / oracle / export / validate over
// JSON instance files. Exit codes: 0 solved or feasible, 1 usage or parse
// problem, 2 infeasible (or failed validation), 3 limit reached.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "eanm/formulations.hpp"
#include "eanm/heuristics.hpp"
#include "eanm/instance_io.hpp"
#include "eanm/milp.hpp"
#include "eanm/mps.hpp"
#include "eanm/oracle.hpp"
#include "eanm/report.hpp"
#include "eanm/validator.hpp"

namespace {

using namespace eanm;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitLimit = 3;

struct VariantFlags {
    std::string scheme = "per-flow";
    int paths_k = 3;
    bool sleep = false;
    bool bundled = false;
    bool alr = false;
    bool big_m_coherence = false;
    bool links_only = false;  // keep chassis powered, sleep links only
    std::string protect = "none";
    bool ecmp = false;
    bool fixed_routing = false;
};

struct OutputFlags {
    std::string report_path;
    std::string csv_path;
    std::string solution_path;
};

void add_variant_flags(CLI::App* cmd, VariantFlags& vf) {
    cmd->add_option("--scheme", vf.scheme, "Routing scheme")
        ->check(CLI::IsMember({"per-flow", "per-source", "per-path", "single-path"}));
    cmd->add_option("--paths-k", vf.paths_k, "Candidate paths per demand for --scheme per-path");
    cmd->add_flag("--sleep", vf.sleep, "Sleep-capable links and routers");
    cmd->add_flag("--bundled", vf.bundled, "Per-card link states (implies --sleep)");
    cmd->add_flag("--alr", vf.alr, "Rate-adaptive links (requires rate_configs)");
    cmd->add_flag("--big-m-coherence", vf.big_m_coherence,
                  "Aggregate node-activation rows instead of pairwise ones");
    cmd->add_flag("--links-only", vf.links_only, "Keep routers on, sleep links only");
    cmd->add_option("--protect", vf.protect, "Protection mode")
        ->check(CLI::IsMember({"none", "dedicated", "shared", "smart-dedicated",
                               "smart-shared"}));
    cmd->add_flag("--ecmp", vf.ecmp, "Shortest-path ECMP weight optimization");
    cmd->add_flag("--fixed-routing", vf.fixed_routing,
                  "One routing shared by all periods (multi-period instances)");
}

void add_output_flags(CLI::App* cmd, OutputFlags& of, bool with_solution = true) {
    cmd->add_option("--out", of.report_path, "Write the JSON report here (default: stdout)");
    cmd->add_option("--csv", of.csv_path, "Also write the flat CSV report");
    if (with_solution)
        cmd->add_option("--solution", of.solution_path, "Write the solution JSON here");
}

RoutingScheme make_scheme(const Instance& inst, const VariantFlags& vf) {
    RoutingScheme scheme;
    if (vf.scheme == "per-flow") scheme.kind = RoutingScheme::PerFlow;
    else if (vf.scheme == "per-source") scheme.kind = RoutingScheme::PerSource;
    else if (vf.scheme == "single-path") scheme.kind = RoutingScheme::SinglePath;
    else {
        scheme.kind = RoutingScheme::PerPath;
        WeightSet w = WeightSet::from_instance(inst);
        for (size_t d = 0; d < inst.demands.size(); ++d)
            scheme.demand_paths[int(d)] =
                k_shortest_paths(inst, w, inst.demands[d], vf.paths_k);
    }
    return scheme;
}

ProtectionMode make_protection(const std::string& name) {
    if (name == "dedicated") return ProtectionMode::Dedicated;
    if (name == "shared") return ProtectionMode::Shared;
    if (name == "smart-dedicated") return ProtectionMode::SmartDedicated;
    if (name == "smart-shared") return ProtectionMode::SmartShared;
    return ProtectionMode::None;
}

VariantSpec make_variant(const Instance& inst, const VariantFlags& vf) {
    VariantSpec v;
    v.scheme = make_scheme(inst, vf);
    v.energy.sleep_links = vf.sleep || vf.bundled;
    v.energy.sleep_nodes = (vf.sleep || vf.bundled || vf.alr) && !vf.links_only;
    v.energy.bundled = vf.bundled;
    v.energy.alr = vf.alr;
    v.energy.use_big_m_coherence = vf.big_m_coherence;
    v.protection = make_protection(vf.protect);
    v.fixed_routing = vf.fixed_routing;
    if (v.protection != ProtectionMode::None) v.id = std::string("protection.") + to_string(v.protection);
    else if (vf.ecmp) v.id = "sp_ecmp";
    else if (inst.multi_period()) v.id = "multiperiod";
    else if (vf.sleep || vf.bundled || vf.alr) v.id = "energy";
    else v.id = "routing";
    return v;
}

BuildResult build_variant(const Instance& inst, const VariantSpec& v) {
    if (v.protection != ProtectionMode::None) return build_protection_model(inst, v.protection);
    if (v.id == "sp_ecmp") return build_sp_ecmp_model(inst);
    if (v.id == "multiperiod")
        return build_multiperiod_model(inst, v.scheme, v.energy, v.fixed_routing);
    if (v.id == "energy") return build_energy_model(inst, v.scheme, v.energy);
    return build_routing_model(inst, v.scheme);
}

Instance load_checked(const std::string& path, bool lenient) {
    std::vector<std::string> warnings;
    Instance inst = load_instance(path, !lenient, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    auto violations = validate_instance(inst);
    if (!violations.empty()) {
        for (const std::string& v : violations) std::cerr << "invalid instance: " << v << "\n";
        throw Error("instance failed validation");
    }
    return inst;
}

void emit_report(const Json& report, const OutputFlags& of) {
    if (of.report_path.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream f(of.report_path);
        if (!f) throw Error("cannot write " + of.report_path);
        f << report.dump(2) << "\n";
    }
    if (!of.csv_path.empty()) {
        std::ofstream f(of.csv_path);
        if (!f) throw Error("cannot write " + of.csv_path);
        f << report_to_csv(report);
    }
}

void emit_solution(const Solution& sol, const OutputFlags& of) {
    if (of.solution_path.empty()) return;
    std::ofstream f(of.solution_path);
    if (!f) throw Error("cannot write " + of.solution_path);
    f << serialize_solution(sol).dump(2) << "\n";
}

Json variant_options_json(const VariantFlags& vf) {
    return Json{{"sleep", vf.sleep},       {"bundled", vf.bundled},
                {"alr", vf.alr},           {"big_m_coherence", vf.big_m_coherence},
                {"links_only", vf.links_only}, {"protect", vf.protect},
                {"ecmp", vf.ecmp},         {"fixed_routing", vf.fixed_routing}};
}

int run_solve(const std::string& instance_path, bool lenient, const VariantFlags& vf,
              const MilpLimits& limits, const OutputFlags& of) {
    Instance inst = load_checked(instance_path, lenient);
    VariantSpec variant = make_variant(inst, vf);
    auto t0 = std::chrono::steady_clock::now();
    BuildResult build = build_variant(inst, variant);
    for (const std::string& w : build.warnings) std::cerr << "warning: " << w << "\n";
    MilpSolution ms = solve_milp(build.model, limits);
    double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    RunMeta meta{"solve", instance_path, inst.name, variant.id, vf.scheme,
                 variant_options_json(vf), 0,
                 Json{{"node_cap", limits.node_cap},
                      {"time_cap_s", limits.time_cap_s},
                      {"gap_target", limits.gap_target}}};
    Solution sol;
    ValidationReport validation;
    bool have_solution =
        ms.status == MilpStatus::Optimal || ms.status == MilpStatus::Feasible ||
        (ms.status == MilpStatus::LimitReached && !ms.values.empty());
    if (have_solution) {
        sol = extract_solution(inst, variant, build, ms.values);
        validation = validate_solution(inst, sol);
    }
    double gap = have_solution && std::isfinite(ms.best_bound) ? ms.objective - ms.best_bound
                                                               : kInf;
    Json report = make_report(meta, to_string(ms.status), ms.objective, ms.best_bound, gap,
                              ms.nodes, wall_ms, inst, have_solution ? &sol : nullptr,
                              have_solution ? &validation : nullptr);
    emit_report(report, of);
    if (have_solution) emit_solution(sol, of);
    switch (ms.status) {
        case MilpStatus::Optimal:
        case MilpStatus::Feasible: return kExitOk;
        case MilpStatus::Infeasible: return kExitInfeasible;
        case MilpStatus::LimitReached: return kExitLimit;
        case MilpStatus::SolverFailure: break;
    }
    std::cerr << "solver failure: " << ms.detail << "\n";
    return kExitUsage;
}

int run_heuristic(const std::string& instance_path, bool lenient, const std::string& policy_name,
                  bool static_order, uint64_t seed, const std::string& feas_name, int k,
                  const std::string& bound_from, const OutputFlags& of) {
    Instance inst = load_checked(instance_path, lenient);
    SortPolicy policy;
    policy.seed = seed;
    policy.static_order = static_order;
    if (policy_name == "random") policy.kind = SortPolicy::Random;
    else if (policy_name == "least-flow") policy.kind = SortPolicy::LeastFlowFirst;
    else if (policy_name == "least-power") policy.kind = SortPolicy::LeastPowerSavingLast;
    else policy.kind = SortPolicy::LeastDegreeFirst;
    FeasMethod feas = FeasMethod::lp();
    if (feas_name == "ksp") feas = FeasMethod::ksp(k);
    else if (feas_name == "ecmp") feas = FeasMethod::ecmp(WeightSet::from_instance(inst));

    auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    bool feasible = true;
    double power = 0.0;
    if (inst.multi_period()) {
        PerPeriodMethod m;
        m.kind = PerPeriodMethod::Greedy;
        m.policy = policy;
        m.feasibility = feas;
        SequentialResult r = multiperiod_sequential(inst, m);
        feasible = r.feasible;
        sol = r.solution;
        power = r.power;
    } else {
        std::vector<double> rates;
        for (const Demand& d : inst.demands) rates.push_back(d.rate);
        GreedyResult g = greedy_sleep(inst, policy, feas, rates);
        feasible = g.feasible_at_start;
        sol = g.solution;
        power = g.power;
    }
    double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    double bound = -kInf;
    if (!bound_from.empty()) {
        std::ifstream f(bound_from);
        if (!f) throw Error("cannot read " + bound_from);
        Json prior;
        f >> prior;
        bound = prior.at("solver").at("objective").get<double>();
    }
    RunMeta meta{"heuristic", instance_path, inst.name, feasible ? sol.variant : "energy",
                 "greedy", Json{{"policy", policy_name},
                                {"static_order", static_order},
                                {"feasibility", feas_name},
                                {"k", k}},
                 seed, Json::object()};
    ValidationReport validation;
    if (feasible) validation = validate_solution(inst, sol);
    double gap = (feasible && std::isfinite(bound)) ? power - bound : kInf;
    Json report =
        make_report(meta, feasible ? "feasible" : "infeasible", feasible ? power : kInf, bound,
                    gap, 0, wall_ms, inst, feasible ? &sol : nullptr,
                    feasible ? &validation : nullptr);
    emit_report(report, of);
    if (feasible) emit_solution(sol, of);
    return feasible ? kExitOk : kExitInfeasible;
}

int run_oracle(const std::string& instance_path, bool lenient, const VariantFlags& vf,
               long long max_states, double time_cap, const OutputFlags& of) {
    Instance inst = load_checked(instance_path, lenient);
    OracleSelector sel;
    sel.energy.bundled = vf.bundled;
    sel.energy.alr = vf.alr;
    if (vf.protect != "none") {
        sel.family = OracleSelector::Protection;
        sel.protection = make_protection(vf.protect);
    } else if (inst.multi_period()) {
        sel.family = OracleSelector::Multiperiod;
    }
    OracleLimits limits;
    limits.max_states = max_states;
    limits.time_cap_s = time_cap;
    auto t0 = std::chrono::steady_clock::now();
    OracleOutcome o = brute_force_optimum(inst, sel, limits);
    double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    RunMeta meta{"oracle", instance_path, inst.name,
                 sel.family == OracleSelector::Protection
                     ? std::string("protection.") + to_string(sel.protection)
                     : (sel.family == OracleSelector::Multiperiod ? "multiperiod" : "energy"),
                 "exhaustive", variant_options_json(vf), 0,
                 Json{{"max_states", max_states},
                      {"time_cap_s", time_cap},
                      {"states_required", o.states_required},
                      {"states_examined", o.states_examined}}};
    ValidationReport validation;
    bool solved = o.status == OracleStatus::Solved;
    if (solved) validation = validate_solution(inst, o.best);
    Json report = make_report(
        meta,
        solved ? "optimal" : (o.status == OracleStatus::Infeasible ? "infeasible" : "limit-reached"),
        solved ? o.power : kInf, solved ? o.power : -kInf, 0.0, 0, wall_ms, inst,
        solved ? &o.best : nullptr, solved ? &validation : nullptr);
    emit_report(report, of);
    if (solved) emit_solution(o.best, of);
    if (o.status == OracleStatus::Solved) return kExitOk;
    return o.status == OracleStatus::Infeasible ? kExitInfeasible : kExitLimit;
}

int run_export(const std::string& instance_path, bool lenient, const VariantFlags& vf,
               const std::string& out_path) {
    Instance inst = load_checked(instance_path, lenient);
    VariantSpec variant = make_variant(inst, vf);
    BuildResult build = build_variant(inst, variant);
    for (const std::string& w : build.warnings) std::cerr << "warning: " << w << "\n";
    MpsWriteResult res = export_lp_file(build.model, out_path);
    std::cout << "wrote " << res.bytes << " bytes to " << out_path;
    if (!res.renamed.empty())
        std::cout << " (name map in " << out_path << ".names)";
    std::cout << "\n";
    return kExitOk;
}

int run_validate(const std::string& instance_path, const std::string& solution_path, bool lenient,
                 double tolerance, const OutputFlags& of) {
    Instance inst = load_checked(instance_path, lenient);
    Solution sol = load_solution(solution_path);
    ValidationReport rep = validate_solution(inst, sol, tolerance);
    RunMeta meta{"validate", instance_path, inst.name, sol.variant, "", Json::object(), 0,
                 Json{{"tolerance", tolerance}}};
    Json report = make_report(meta, rep.passed() ? "valid" : "invalid", sol.total_power,
                              rep.recomputed_power, sol.total_power - rep.recomputed_power, 0,
                              0.0, inst, &sol, &rep);
    emit_report(report, of);
    return rep.passed() ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-aware network management toolkit"};
    app.require_subcommand(1);
    bool lenient = false;
    app.add_flag("--lenient", lenient, "Warn on unknown instance keys instead of failing");

    std::string instance_path, solution_path, out_path, bound_from;
    VariantFlags vf;
    OutputFlags of;
    MilpLimits limits;
    std::string policy = "least-flow";
    std::string feas = "lp";
    bool static_order = false;
    uint64_t seed = 0;
    int k = 3;
    long long max_states = 1LL << 20;
    double oracle_time_cap = 120.0;
    double tolerance = 1e-6;

    CLI::App* solve = app.add_subcommand("solve", "Build and solve a model exactly");
    solve->add_option("instance", instance_path, "Instance JSON file")->required();
    add_variant_flags(solve, vf);
    solve->add_option("--node-cap", limits.node_cap, "Branch-and-bound node cap");
    solve->add_option("--time-cap", limits.time_cap_s, "Wall-clock cap in seconds");
    solve->add_option("--gap", limits.gap_target, "Absolute optimality gap target");
    add_output_flags(solve, of);

    CLI::App* heur = app.add_subcommand("heuristic", "Greedy switch-off / per-period heuristic");
    heur->add_option("instance", instance_path, "Instance JSON file")->required();
    heur->add_option("--policy", policy, "Candidate ordering")
        ->check(CLI::IsMember({"random", "least-flow", "least-power", "least-degree"}));
    heur->add_flag("--static-order", static_order, "Freeze the initial least-flow order");
    heur->add_option("--seed", seed, "Seed for --policy random");
    heur->add_option("--feas", feas, "Feasibility test")
        ->check(CLI::IsMember({"lp", "ksp", "ecmp"}));
    heur->add_option("--k", k, "Paths per demand for --feas ksp");
    heur->add_option("--bound-from", bound_from, "Prior solve report for the gap column");
    add_output_flags(heur, of);

    CLI::App* oracle = app.add_subcommand("oracle", "Brute-force optimum for tiny instances");
    oracle->add_option("instance", instance_path, "Instance JSON file")->required();
    add_variant_flags(oracle, vf);
    oracle->add_option("--max-states", max_states, "State-vector budget");
    oracle->add_option("--time-cap", oracle_time_cap, "Wall-clock cap in seconds");
    add_output_flags(oracle, of);

    CLI::App* exp = app.add_subcommand("export", "Write the model as an MPS file");
    exp->add_option("instance", instance_path, "Instance JSON file")->required();
    add_variant_flags(exp, vf);
    exp->add_option("--out", out_path, "Output MPS path")->required();

    CLI::App* val = app.add_subcommand("validate", "Re-check a solution file");
    val->add_option("instance", instance_path, "Instance JSON file")->required();
    val->add_option("solution", solution_path, "Solution JSON file")->required();
    val->add_option("--tolerance", tolerance, "Validation tolerance");
    add_output_flags(val, of, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (solve->parsed()) return run_solve(instance_path, lenient, vf, limits, of);
        if (heur->parsed())
            return run_heuristic(instance_path, lenient, policy, static_order, seed, feas, k,
                                 bound_from, of);
        if (oracle->parsed())
            return run_oracle(instance_path, lenient, vf, max_states, oracle_time_cap, of);
        if (exp->parsed()) return run_export(instance_path, lenient, vf, out_path);
        if (val->parsed())
            return run_validate(instance_path, solution_path, lenient, tolerance, of);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
