#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eanm/heuristics.hpp"
#include "helpers.hpp"

using namespace eanm;

namespace {

std::vector<double> rates_of(const Instance& in) {
    std::vector<double> r;
    for (const Demand& d : in.demands) r.push_back(d.rate);
    return r;
}

// The trap: sleeping the cheap detour first locks the expensive direct arc on.
Instance trap_instance() {
    Instance in;
    in.name = "trap";
    in.nodes = {{"A", 1.0, 0.0, {}}, {"B", 1.0, 0.0, {}}, {"C", 1.0, 0.0, {}}};
    auto arc = [](std::string u, std::string v, double pi) {
        LinkSpec l;
        l.from = std::move(u);
        l.to = std::move(v);
        l.card_capacity = 10.0;
        l.fixed_power = pi;
        return l;
    };
    in.links = {arc("A", "B", 6.0), arc("A", "C", 2.0), arc("C", "B", 2.0)};
    in.demands = {{"A", "B", 10.0, {}}};
    return in;
}

}  // namespace

TEST_CASE("least-flow greedy reaches the triangle optimum") {
    Instance in = testing::triangle_instance();
    GreedyResult g = greedy_sleep(in, {SortPolicy::LeastFlowFirst, 0, false},
                                  FeasMethod::lp(), rates_of(in));
    REQUIRE(g.feasible_at_start);
    CHECK(g.power == doctest::Approx(1.0));
    ValidationReport rep = validate_solution(in, g.solution);
    CHECK(rep.passed());
    MilpSolution exact = solve_milp(build_energy_model(in, RoutingScheme::per_flow(), {}).model);
    REQUIRE(exact.status == MilpStatus::Optimal);
    CHECK(g.power == doctest::Approx(exact.objective));
}

TEST_CASE("greedy trajectories only ever lower the power") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Instance in = testing::random_instance(seed);
        GreedyResult g = greedy_sleep(in, {SortPolicy::LeastFlowFirst, 0, false},
                                      FeasMethod::lp(), rates_of(in));
        if (!g.feasible_at_start) continue;
        double prev = kInf;
        for (double p : g.power_trace) {
            CHECK(p <= prev + 1e-9);
            prev = p;
        }
    }
}

TEST_CASE("greedy never beats the exact optimum and always validates") {
    int compared = 0;
    for (uint64_t seed = 1; seed <= 25; ++seed) {
        Instance in = testing::random_instance(seed);
        GreedyResult g = greedy_sleep(in, {SortPolicy::LeastPowerSavingLast, 0, false},
                                      FeasMethod::lp(), rates_of(in));
        if (!g.feasible_at_start) continue;
        CHECK(validate_solution(in, g.solution).passed());
        MilpSolution exact =
            solve_milp(build_energy_model(in, RoutingScheme::per_flow(), {}).model);
        if (exact.status != MilpStatus::Optimal) continue;
        CHECK(g.power >= exact.objective - 1e-6);
        ++compared;
    }
    CHECK(compared >= 15);
}

TEST_CASE("some random order falls into the constructed trap") {
    Instance in = trap_instance();
    MilpSolution exact = solve_milp(build_energy_model(in, RoutingScheme::per_flow(), {}).model);
    REQUIRE(exact.status == MilpStatus::Optimal);
    CHECK(exact.objective == doctest::Approx(7.0));  // detour on, direct asleep
    bool found_gap = false;
    for (uint64_t seed = 0; seed <= 30 && !found_gap; ++seed) {
        GreedyResult g = greedy_sleep(in, {SortPolicy::Random, seed, false}, FeasMethod::lp(),
                                      rates_of(in));
        REQUIRE(g.feasible_at_start);
        CHECK(validate_solution(in, g.solution).passed());
        CHECK(g.power >= exact.objective - 1e-6);
        if (g.power > exact.objective + 1e-6) found_gap = true;
    }
    CHECK(found_gap);
}

TEST_CASE("the same seed reproduces the same run") {
    Instance in = testing::random_instance(5);
    GreedyResult a = greedy_sleep(in, {SortPolicy::Random, 7, false}, FeasMethod::lp(),
                                  rates_of(in));
    GreedyResult b = greedy_sleep(in, {SortPolicy::Random, 7, false}, FeasMethod::lp(),
                                  rates_of(in));
    REQUIRE(a.feasible_at_start == b.feasible_at_start);
    CHECK(a.power == b.power);
    CHECK(a.solution.link_state == b.solution.link_state);
    CHECK(a.solution.node_on == b.solution.node_on);
}

TEST_CASE("infeasible-at-start is reported, not papered over") {
    Instance in = testing::two_node_instance();
    in.demands[0].rate = 50.0;  // exceeds every capacity
    GreedyResult g = greedy_sleep(in, {SortPolicy::LeastFlowFirst, 0, false}, FeasMethod::lp(),
                                  rates_of(in));
    CHECK_FALSE(g.feasible_at_start);
}

TEST_CASE("greedy with the ecmp test respects utilization thresholds") {
    Instance in = testing::diamond_instance();
    GreedyResult g = greedy_sleep(in, {SortPolicy::LeastFlowFirst, 0, false},
                                  FeasMethod::ecmp(WeightSet::from_instance(in)), rates_of(in));
    REQUIRE(g.feasible_at_start);
    // demand 8 fits on one branch: two links sleep
    int active = 0;
    for (int c : g.solution.link_state[0]) active += c > 0 ? 1 : 0;
    CHECK(active == 2);
    CHECK(validate_solution(in, g.solution).passed());
}

TEST_CASE("bundled links shed cards one at a time") {
    Instance in;
    in.nodes = {{"A", 0.0, 0.0, {}}, {"B", 0.0, 0.0, {}}};
    LinkSpec l;
    l.from = "A";
    l.to = "B";
    l.card_capacity = 10.0;
    l.num_cards = 3;
    l.fixed_power = 2.0;
    in.links = {l};
    in.demands = {{"A", "B", 12.0, {}}};
    GreedyResult g = greedy_sleep(in, {SortPolicy::LeastFlowFirst, 0, false}, FeasMethod::lp(),
                                  rates_of(in));
    REQUIRE(g.feasible_at_start);
    CHECK(g.solution.link_state[0][0] == 2);  // 12 units need two 10-unit cards
    CHECK(g.power == doctest::Approx(4.0));
}

TEST_CASE("sequential per-period solves match the sum when uncoupled") {
    Instance in = testing::two_node_instance();
    in.periods = {"P1", "P2"};
    in.demands[0].per_period_rates = {{"P1", 5.0}, {"P2", 0.0}};
    in.reactivation_fraction = 0.0;
    in.max_reactivations = 2;
    SequentialResult r = multiperiod_sequential(in, {PerPeriodMethod::Milp, {}, {}});
    REQUIRE(r.feasible);
    CHECK(r.power == doctest::Approx(23.0));
    CHECK(validate_solution(in, r.solution).passed());
}

TEST_CASE("sequential never beats the coupled optimum under coupling") {
    Instance in = testing::two_node_instance();
    in.periods = {"P1", "P2"};
    in.demands[0].per_period_rates = {{"P1", 5.0}, {"P2", 0.0}};
    in.reactivation_fraction = 0.5;
    in.max_reactivations = 2;
    SequentialResult r = multiperiod_sequential(in, {PerPeriodMethod::Milp, {}, {}});
    REQUIRE(r.feasible);
    CHECK(validate_solution(in, r.solution).passed());
    MilpSolution coupled =
        solve_milp(build_multiperiod_model(in, RoutingScheme::per_flow(), {}, false).model);
    REQUIRE(coupled.status == MilpStatus::Optimal);
    CHECK(coupled.objective <= r.power + 1e-6);
    CHECK(coupled.objective == doctest::Approx(33.0));
}

TEST_CASE("card-budget coupling opens a strict sequential gap") {
    Instance in = testing::two_node_instance();
    in.nodes[0].fixed_power = in.nodes[1].fixed_power = 0.0;
    in.periods = {"P1", "P2", "P3", "P4"};
    in.demands[0].per_period_rates = {{"P1", 5.0}, {"P2", 0.0}, {"P3", 5.0}, {"P4", 0.0}};
    in.max_reactivations = 1;
    SequentialResult r = multiperiod_sequential(in, {PerPeriodMethod::Milp, {}, {}});
    REQUIRE(r.feasible);
    MilpSolution coupled =
        solve_milp(build_multiperiod_model(in, RoutingScheme::per_flow(), {}, false).model);
    REQUIRE(coupled.status == MilpStatus::Optimal);
    CHECK(validate_solution(in, r.solution).passed());
    // pinning keeps the card on all four periods; the coupled model wakes once
    CHECK(coupled.objective == doctest::Approx(9.0));
    CHECK(r.power == doctest::Approx(12.0));
    CHECK(coupled.objective < r.power - 1e-6);
}

TEST_CASE("pinning repairs reactivation-budget violations") {
    Instance in = testing::two_node_instance();
    in.nodes[0].fixed_power = in.nodes[1].fixed_power = 0.0;
    in.periods = {"P1", "P2", "P3", "P4"};
    in.demands[0].per_period_rates = {{"P1", 5.0}, {"P2", 0.0}, {"P3", 5.0}, {"P4", 0.0}};
    in.reactivation_fraction = 0.0;
    in.max_reactivations = 1;
    SequentialResult r = multiperiod_sequential(in, {PerPeriodMethod::Milp, {}, {}});
    REQUIRE(r.feasible);
    CHECK(r.pinned_links == 1);
    ValidationReport rep = validate_solution(in, r.solution);
    CHECK(rep.passed());
    CHECK(r.power == doctest::Approx(12.0));  // pinned on across all four periods
}

TEST_CASE("greedy per-period sequential also yields a valid schedule") {
    Instance in = testing::diamond_instance();
    in.periods = {"P1", "P2"};
    in.demands[0].per_period_rates = {{"P1", 8.0}, {"P2", 2.0}};
    in.max_reactivations = 2;
    PerPeriodMethod m;
    m.kind = PerPeriodMethod::Greedy;
    m.policy = {SortPolicy::LeastFlowFirst, 0, false};
    m.feasibility = FeasMethod::lp();
    SequentialResult r = multiperiod_sequential(in, m, PeriodOrder::AscendingLoad);
    REQUIRE(r.feasible);
    CHECK(validate_solution(in, r.solution).passed());
}

TEST_CASE("assign_sleeping_weights pins slept arcs at omega_max") {
    Instance in = testing::diamond_instance();
    in.omega_max = 12.0;
    WeightSet w = WeightSet::from_instance(in);
    std::vector<int> state = {1, 1, 1, 1};
    WeightSet same = assign_sleeping_weights(w, in, state);
    CHECK(same.omega == w.omega);
    state[1] = 0;
    WeightSet adj = assign_sleeping_weights(w, in, state);
    CHECK(adj.omega[1] == doctest::Approx(12.0));
    CHECK(adj.omega[0] == doctest::Approx(1.0));
    CHECK(adj.check(in).empty());
    // ECMP over the adjusted weights avoids the slept arc
    ActiveMask mask = ActiveMask::all_on(in);
    mask.link_cards[1] = 0;
    std::vector<double> rates = {8.0};
    LoadMap lm = compute_ecmp_loads(in, adj, mask, rates);
    CHECK(lm.arc_load[1] == doctest::Approx(0.0));
    CHECK(lm.arc_load[0] == doctest::Approx(8.0));
}

TEST_CASE("static least-flow order still produces a valid configuration") {
    for (uint64_t seed : {2u, 9u}) {
        Instance in = testing::random_instance(seed);
        std::vector<double> rates;
        for (const Demand& d : in.demands) rates.push_back(d.rate);
        GreedyResult g = greedy_sleep(in, {SortPolicy::LeastFlowFirst, 0, true},
                                      FeasMethod::lp(), rates);
        if (!g.feasible_at_start) continue;
        CHECK(validate_solution(in, g.solution).passed());
    }
}
