#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eanm/heuristics.hpp"
#include "eanm/oracle.hpp"
#include "eanm/validator.hpp"
#include "helpers.hpp"

using namespace eanm;

TEST_CASE("two-node sleep optimum is 23") {
    OracleOutcome o = brute_force_optimum(testing::two_node_instance(), {});
    REQUIRE(o.status == OracleStatus::Solved);
    CHECK(o.power == doctest::Approx(23.0));
    CHECK(validate_solution(testing::two_node_instance(), o.best).passed());
}

TEST_CASE("triangle sleep optimum is 1") {
    OracleOutcome o = brute_force_optimum(testing::triangle_instance(), {});
    REQUIRE(o.status == OracleStatus::Solved);
    CHECK(o.power == doctest::Approx(1.0));
}

TEST_CASE("oracle agrees with branch-and-bound on random sleep instances") {
    int agreed = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Instance in = testing::random_instance(seed, {5, 8, 4, 2, false});
        OracleSelector sel;
        sel.energy.bundled = true;
        OracleOutcome o = brute_force_optimum(in, sel);
        EnergyOptions opt;
        opt.bundled = true;
        MilpSolution m = solve_milp(build_energy_model(in, RoutingScheme::per_flow(), opt).model);
        if (o.status == OracleStatus::Infeasible) {
            CHECK(m.status == MilpStatus::Infeasible);
            continue;
        }
        REQUIRE(o.status == OracleStatus::Solved);
        REQUIRE(m.status == MilpStatus::Optimal);
        CHECK(o.power == doctest::Approx(m.objective).epsilon(1e-6));
        CHECK(validate_solution(in, o.best).passed());
        ++agreed;
    }
    CHECK(agreed >= 15);
}

TEST_CASE("oracle handles load-proportional costs") {
    for (uint64_t seed : {3u, 6u}) {
        Instance in = testing::random_instance(seed, {4, 6, 2, 1, true});
        OracleOutcome o = brute_force_optimum(in, {});
        MilpSolution m = solve_milp(build_energy_model(in, RoutingScheme::per_flow(), {}).model);
        if (o.status != OracleStatus::Solved) continue;
        REQUIRE(m.status == MilpStatus::Optimal);
        CHECK(o.power == doctest::Approx(m.objective).epsilon(1e-6));
    }
}

TEST_CASE("oracle optimum lower-bounds every validated feasible configuration") {
    Instance in = testing::random_instance(11);
    OracleOutcome o = brute_force_optimum(in, {});
    REQUIRE(o.status == OracleStatus::Solved);
    std::vector<double> rates;
    for (const Demand& d : in.demands) rates.push_back(d.rate);
    for (uint64_t seed = 0; seed < 6; ++seed) {
        GreedyResult g = greedy_sleep(in, {SortPolicy::Random, seed, false}, FeasMethod::lp(),
                                      rates);
        if (!g.feasible_at_start) continue;
        REQUIRE(validate_solution(in, g.solution).passed());
        CHECK(o.power <= g.power + 1e-9);
    }
}

TEST_CASE("limit-exceeded reports the required state count") {
    Instance in = testing::random_instance(2, {5, 8, 3, 2, false});
    OracleLimits lim;
    lim.max_states = 8;
    OracleOutcome o = brute_force_optimum(in, {}, lim);
    CHECK(o.status == OracleStatus::LimitExceeded);
    CHECK(o.states_required > 8);
}

TEST_CASE("alr oracle picks the cheapest sufficient configs") {
    Instance in = testing::two_node_instance();
    in.links[0].rate_configs = {{0.0, 0.0}, {4.0, 1.0}, {10.0, 2.5}, {40.0, 9.0}};
    OracleSelector sel;
    sel.energy.alr = true;
    sel.energy.sleep_links = false;
    OracleOutcome o = brute_force_optimum(in, sel);
    REQUIRE(o.status == OracleStatus::Solved);
    // demand 5 needs the 10-unit config: 2.5 + both routers
    CHECK(o.power == doctest::Approx(22.5));
    CHECK(o.best.link_state[0][0] == 2);
    EnergyOptions opt;
    opt.alr = true;
    opt.sleep_links = false;
    MilpSolution m = solve_milp(build_energy_model(in, RoutingScheme::per_flow(), opt).model);
    REQUIRE(m.status == MilpStatus::Optimal);
    CHECK(m.objective == doctest::Approx(o.power));
}

TEST_CASE("protection oracle matches the MILP on the square ring") {
    Instance in = testing::ring_instance(4);
    in.demands = {{"N0", "N2", 2.0, {}}};
    for (ProtectionMode mode : {ProtectionMode::Dedicated, ProtectionMode::Shared,
                                ProtectionMode::SmartDedicated, ProtectionMode::SmartShared}) {
        OracleSelector sel;
        sel.family = OracleSelector::Protection;
        sel.protection = mode;
        OracleOutcome o = brute_force_optimum(in, sel);
        REQUIRE(o.status == OracleStatus::Solved);
        MilpSolution m = solve_milp(build_protection_model(in, mode).model);
        REQUIRE(m.status == MilpStatus::Optimal);
        CHECK(o.power == doctest::Approx(m.objective).epsilon(1e-6));
        CHECK(validate_solution(in, o.best).passed());
    }
}

TEST_CASE("shared pooling shows up in the oracle too") {
    Instance in;
    for (std::string id : {"a", "b", "x1", "x2", "x3"}) in.nodes.push_back({id, 0.0, 0.0, {}});
    auto arc = [](std::string u, std::string v) {
        LinkSpec l;
        l.from = std::move(u);
        l.to = std::move(v);
        l.card_capacity = 10.0;
        l.per_unit_power = 1.0;
        return l;
    };
    in.links = {arc("a", "x1"), arc("x1", "b"), arc("a", "x2"),
                arc("x2", "b"), arc("a", "x3"), arc("x3", "b")};
    in.demands = {{"a", "b", 3.0, {}}, {"a", "b", 2.0, {}}};
    OracleSelector ded{OracleSelector::Protection, {}, ProtectionMode::Dedicated};
    OracleSelector sh{OracleSelector::Protection, {}, ProtectionMode::Shared};
    OracleOutcome od = brute_force_optimum(in, ded);
    OracleOutcome os = brute_force_optimum(in, sh);
    REQUIRE(od.status == OracleStatus::Solved);
    REQUIRE(os.status == OracleStatus::Solved);
    CHECK(od.power == doctest::Approx(20.0));
    CHECK(os.power == doctest::Approx(16.0));
}

TEST_CASE("multiperiod oracle agrees with the coupled MILP") {
    Instance in = testing::two_node_instance();
    in.periods = {"P1", "P2"};
    in.demands[0].per_period_rates = {{"P1", 5.0}, {"P2", 0.0}};
    in.reactivation_fraction = 0.5;
    in.max_reactivations = 2;
    OracleSelector sel;
    sel.family = OracleSelector::Multiperiod;
    OracleOutcome o = brute_force_optimum(in, sel);
    REQUIRE(o.status == OracleStatus::Solved);
    CHECK(o.power == doctest::Approx(33.0));
    CHECK(validate_solution(in, o.best).passed());
    MilpSolution m = solve_milp(
        build_multiperiod_model(in, RoutingScheme::per_flow(), {}, false).model);
    REQUIRE(m.status == MilpStatus::Optimal);
    CHECK(m.objective == doctest::Approx(o.power));
}

TEST_CASE("multiperiod oracle honors the per-card budget") {
    Instance in = testing::two_node_instance();
    in.nodes[0].fixed_power = in.nodes[1].fixed_power = 0.0;
    in.periods = {"P1", "P2", "P3", "P4"};
    in.demands[0].per_period_rates = {{"P1", 5.0}, {"P2", 0.0}, {"P3", 5.0}, {"P4", 0.0}};
    in.max_reactivations = 1;
    OracleSelector sel;
    sel.family = OracleSelector::Multiperiod;
    OracleOutcome o = brute_force_optimum(in, sel);
    REQUIRE(o.status == OracleStatus::Solved);
    CHECK(o.power == doctest::Approx(9.0));
}

TEST_CASE("piecewise profiles are rejected up front") {
    Instance in = testing::two_node_instance();
    in.nodes[0].piecewise = {{5.0, 0.5}};
    CHECK_THROWS_AS(brute_force_optimum(in, {}), Error);
}

TEST_CASE("tie-breaking is deterministic across repeated runs") {
    // two identical parallel branches: symmetric optima, one canonical pick
    Instance in;
    for (std::string id : {"A", "B", "X1", "X2"}) in.nodes.push_back({id, 0.0, 0.0, {}});
    auto arc = [](std::string u, std::string v) {
        LinkSpec l;
        l.from = std::move(u);
        l.to = std::move(v);
        l.card_capacity = 10.0;
        l.fixed_power = 1.0;
        return l;
    };
    in.links = {arc("A", "X1"), arc("X1", "B"), arc("A", "X2"), arc("X2", "B")};
    in.demands = {{"A", "B", 2.0, {}}};
    OracleOutcome first = brute_force_optimum(in, {});
    OracleOutcome second = brute_force_optimum(in, {});
    REQUIRE(first.status == OracleStatus::Solved);
    CHECK(first.power == doctest::Approx(2.0));
    CHECK(first.best.link_state == second.best.link_state);
    CHECK(first.best.node_on == second.best.node_on);
}
