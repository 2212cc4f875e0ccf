#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "eanm/milp.hpp"
#include "helpers.hpp"

using namespace eanm;

namespace {

// Knapsack-style toy: min -5x -4y s.t. 6x + 5y <= 9, x,y binary.
MilpModel knapsack() {
    MilpModel m;
    int x = m.lp.add_variable("x", 0.0, 1.0, -5.0);
    int y = m.lp.add_variable("y", 0.0, 1.0, -4.0);
    m.lp.add_row("cap", Relation::LessEqual, 9.0, {{x, 6.0}, {y, 5.0}});
    m.integrality["x"] = IntegerKind::Binary;
    m.integrality["y"] = IntegerKind::Binary;
    return m;
}

// Exhaustive 0/1 enumeration as an oracle for small binary programs.
double enumerate_binary_optimum(const MilpModel& m, bool& feasible) {
    int n = static_cast<int>(m.lp.variables.size());
    std::vector<int> ints;
    for (int j = 0; j < n; ++j)
        if (m.integrality.count(m.lp.variables[j].name)) ints.push_back(j);
    feasible = false;
    double best = kInf;
    for (uint64_t mask = 0; mask < (uint64_t{1} << ints.size()); ++mask) {
        LinearProgram lp = m.lp;
        for (size_t k = 0; k < ints.size(); ++k) {
            double v = (mask >> k) & 1 ? 1.0 : 0.0;
            lp.variables[ints[k]].lower = v;
            lp.variables[ints[k]].upper = v;
        }
        LpSolution s = solve_lp(lp);
        if (s.status != LpStatus::Optimal) continue;
        feasible = true;
        best = std::min(best, s.objective);
    }
    return best;
}

}  // namespace

TEST_CASE("knapsack toy solves to the enumerated optimum") {
    MilpModel m = knapsack();
    MilpSolution s = solve_milp(m);
    REQUIRE(s.status == MilpStatus::Optimal);
    bool feasible = false;
    double oracle = enumerate_binary_optimum(m, feasible);
    REQUIRE(feasible);
    CHECK(s.objective == doctest::Approx(oracle));      // -5 (x=1, y=0)
    CHECK(s.objective == doctest::Approx(-5.0));
    CHECK(s.best_bound == doctest::Approx(s.objective));
    CHECK(s.root_objective <= s.objective + 1e-9);
}

TEST_CASE("an LP-integral model finishes at the root") {
    MilpModel m;
    int x = m.lp.add_variable("x", 0.0, 4.0, 1.0);
    m.lp.add_row("lo", Relation::GreaterEqual, 2.0, {{x, 1.0}});
    m.integrality["x"] = IntegerKind::General;
    MilpSolution s = solve_milp(m);
    REQUIRE(s.status == MilpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(2.0));
    CHECK(s.nodes == 1);
}

TEST_CASE("infeasible integer programs are reported") {
    MilpModel m;
    int x = m.lp.add_variable("x", 0.0, 1.0, 1.0);
    m.lp.add_row("bad", Relation::GreaterEqual, 2.0, {{x, 1.0}});
    m.integrality["x"] = IntegerKind::Binary;
    CHECK(solve_milp(m).status == MilpStatus::Infeasible);
}

TEST_CASE("node cap produces limit-reached with a usable bound") {
    // Uniform weights with an odd capacity force a fractional LP optimum.
    MilpModel m;
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < 10; ++j) {
        int v = m.lp.add_variable("b" + std::to_string(j), 0.0, 1.0, -(3.0 + (j % 4)));
        m.integrality["b" + std::to_string(j)] = IntegerKind::Binary;
        row.push_back({v, 2.0});
    }
    m.lp.add_row("cap", Relation::LessEqual, 7.0, row);
    MilpLimits lim;
    lim.node_cap = 1;
    MilpSolution s = solve_milp(m, lim);
    CHECK(s.status == MilpStatus::LimitReached);
    MilpSolution full = solve_milp(m);
    REQUIRE(full.status == MilpStatus::Optimal);
    CHECK(s.best_bound <= full.objective + 1e-9);
}

TEST_CASE("random binary programs match exhaustive enumeration") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        MilpModel m;
        int n = 3 + static_cast<int>(rng() % 5);
        std::vector<std::pair<int, double>> row1, row2;
        for (int j = 0; j < n; ++j) {
            int v = m.lp.add_variable("b" + std::to_string(j), 0.0, 1.0,
                                      static_cast<double>(rng() % 13) - 6.0);
            m.integrality["b" + std::to_string(j)] = IntegerKind::Binary;
            row1.push_back({v, static_cast<double>(1 + rng() % 4)});
            if (rng() % 2) row2.push_back({v, static_cast<double>(1 + rng() % 4)});
        }
        m.lp.add_row("r1", Relation::LessEqual, static_cast<double>(2 + rng() % 8), row1);
        if (!row2.empty())
            m.lp.add_row("r2", Relation::GreaterEqual, static_cast<double>(rng() % 3), row2);
        bool feasible = false;
        double oracle = enumerate_binary_optimum(m, feasible);
        MilpSolution s = solve_milp(m);
        if (!feasible) {
            CHECK(s.status == MilpStatus::Infeasible);
        } else {
            REQUIRE(s.status == MilpStatus::Optimal);
            CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-6));
            CHECK(s.root_objective <= s.objective + 1e-6);  // relaxation dominance
            for (int j = 0; j < n; ++j) {
                double v = s.values[j];
                CHECK(std::fabs(v - std::round(v)) <= 1e-6);
            }
        }
    }
}

TEST_CASE("general integers branch correctly") {
    // min x + y s.t. 3x + 2y >= 7, x,y integer in [0,5]
    MilpModel m;
    int x = m.lp.add_variable("x", 0.0, 5.0, 1.0);
    int y = m.lp.add_variable("y", 0.0, 5.0, 1.0);
    m.lp.add_row("need", Relation::GreaterEqual, 7.0, {{x, 3.0}, {y, 2.0}});
    m.integrality["x"] = IntegerKind::General;
    m.integrality["y"] = IntegerKind::General;
    MilpSolution s = solve_milp(m);
    REQUIRE(s.status == MilpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(3.0));  // x=1,y=2 or x=3,y=0... both cost 3
}

TEST_CASE("model check rejects bad integrality metadata") {
    MilpModel m;
    m.lp.add_variable("x", 0.0, 2.0, 1.0);
    m.integrality["x"] = IntegerKind::Binary;  // bounds exceed [0,1]
    CHECK_FALSE(m.check().empty());
    MilpModel m2;
    m2.lp.add_variable("x", 0.0, kInf, 1.0);
    m2.integrality["x"] = IntegerKind::General;  // infinite bound
    CHECK_FALSE(m2.check().empty());
}

TEST_CASE("the global bound never regresses during the search") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        MilpModel m;
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < 8; ++j) {
            int v = m.lp.add_variable("b" + std::to_string(j), 0.0, 1.0,
                                      -(1.0 + double(rng() % 7)));
            m.integrality["b" + std::to_string(j)] = IntegerKind::Binary;
            row.push_back({v, 2.0});
        }
        m.lp.add_row("cap", Relation::LessEqual, 5.0, row);
        MilpSolution s = solve_milp(m);
        REQUIRE(s.status == MilpStatus::Optimal);
        double prev = -kInf;
        for (double b : s.bound_trace) {
            CHECK(b >= prev - 1e-12);
            prev = b;
        }
        if (!s.bound_trace.empty()) CHECK(s.bound_trace.back() <= s.objective + 1e-9);
    }
}
