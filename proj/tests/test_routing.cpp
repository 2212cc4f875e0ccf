#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eanm/routing.hpp"
#include "helpers.hpp"

using namespace eanm;

namespace {

Instance chain_instance() {
    Instance in;
    for (std::string id : {"A", "B", "C"}) in.nodes.push_back({id, 0.0, 0.0, {}});
    auto arc = [](std::string u, std::string v) {
        LinkSpec l;
        l.from = std::move(u);
        l.to = std::move(v);
        l.card_capacity = 10.0;
        l.weight = 1.0;
        return l;
    };
    in.links = {arc("A", "B"), arc("B", "C")};
    in.demands = {{"A", "C", 5.0, {}}};
    return in;
}

Instance complete4() {
    Instance in;
    std::vector<std::string> ids = {"A", "B", "C", "D"};
    for (auto& id : ids) in.nodes.push_back({id, 0.0, 0.0, {}});
    for (auto& u : ids)
        for (auto& v : ids) {
            if (u == v) continue;
            LinkSpec l;
            l.from = u;
            l.to = v;
            l.card_capacity = 10.0;
            l.weight = 1.0;
            in.links.push_back(l);
        }
    in.demands = {{"A", "D", 1.0, {}}};
    return in;
}

double path_weight(const WeightSet& w, const std::vector<int>& path) {
    double s = 0.0;
    for (int a : path) s += w.omega[a];
    return s;
}

}  // namespace

TEST_CASE("chain distances accumulate toward the destination") {
    Instance in = chain_instance();
    auto d = shortest_distances(in, WeightSet::from_instance(in), std::string("C"),
                                ActiveMask::all_on(in));
    CHECK(d[0] == doctest::Approx(2.0));
    CHECK(d[1] == doctest::Approx(1.0));
    CHECK(d[2] == doctest::Approx(0.0));
}

TEST_CASE("diamond distances are symmetric and respect the mask") {
    Instance in = testing::diamond_instance();
    WeightSet w = WeightSet::from_instance(in);
    ActiveMask all = ActiveMask::all_on(in);
    auto d = shortest_distances(in, w, std::string("t"), all);
    CHECK(d[0] == doctest::Approx(2.0));  // s
    CHECK(d[1] == doctest::Approx(1.0));  // a
    CHECK(d[2] == doctest::Approx(1.0));  // b
    ActiveMask masked = all;
    masked.link_cards[0] = 0;  // sleep s->a
    auto d2 = shortest_distances(in, w, std::string("t"), masked);
    CHECK(d2[0] == doctest::Approx(2.0));  // still via b
    masked.link_cards[3] = 0;  // also sleep b->t: s unreachable
    auto d3 = shortest_distances(in, w, std::string("t"), masked);
    CHECK(!std::isfinite(d3[0]));
}

TEST_CASE("ecmp splits the diamond evenly") {
    Instance in = testing::diamond_instance();
    std::vector<double> rates = {8.0};
    LoadMap lm = compute_ecmp_loads(in, WeightSet::from_instance(in), ActiveMask::all_on(in),
                                    rates);
    for (double v : lm.arc_load) CHECK(v == doctest::Approx(4.0));
    CHECK(lm.node_load[0] == doctest::Approx(8.0));  // s originates 8
    CHECK(lm.node_load[3] == doctest::Approx(8.0));  // t absorbs 8
}

TEST_CASE("raising one branch weight moves all traffic to the other") {
    Instance in = testing::diamond_instance();
    WeightSet w = WeightSet::from_instance(in);
    w.omega[0] = 3.0;  // s->a now longer
    std::vector<double> rates = {8.0};
    LoadMap lm = compute_ecmp_loads(in, w, ActiveMask::all_on(in), rates);
    CHECK(lm.arc_load[0] == doctest::Approx(0.0));
    CHECK(lm.arc_load[1] == doctest::Approx(8.0));
    CHECK(lm.arc_load[3] == doctest::Approx(8.0));
}

TEST_CASE("mid-path demands add onto the propagated shares") {
    Instance in = testing::diamond_instance();
    in.demands.push_back({"a", "t", 2.0, {}});
    std::vector<double> rates = {8.0, 2.0};
    LoadMap lm = compute_ecmp_loads(in, WeightSet::from_instance(in), ActiveMask::all_on(in),
                                    rates);
    CHECK(lm.arc_load[2] == doctest::Approx(6.0));  // a->t: 4 + 2
    CHECK(lm.arc_load[3] == doctest::Approx(4.0));  // b->t
    CHECK(lm.node_load[1] == doctest::Approx(6.0)); // a: 4 entering + 2 originated
}

TEST_CASE("unreachable demands raise a routability error") {
    Instance in = chain_instance();
    ActiveMask mask = ActiveMask::all_on(in);
    mask.link_cards[1] = 0;
    std::vector<double> rates = {5.0};
    CHECK_THROWS_AS(compute_ecmp_loads(in, WeightSet::from_instance(in), mask, rates), Error);
}

TEST_CASE("ecmp conserves flow at every node") {
    for (uint64_t seed = 1; seed <= 15; ++seed) {
        Instance in = testing::random_instance(seed);
        for (LinkSpec& l : in.links) l.weight = 1.0 + double(seed % 3);
        WeightSet w = WeightSet::from_instance(in);
        ActiveMask mask = ActiveMask::all_on(in);
        Topology topo = make_topology(in);
        std::vector<double> rates;
        for (const Demand& d : in.demands) rates.push_back(d.rate);
        LoadMap lm = compute_ecmp_loads(in, w, mask, rates);
        // float mode: inflow + originated == outflow + terminated within 1e-9
        for (int i = 0; i < topo.num_nodes; ++i) {
            double in_flow = 0.0, out_flow = 0.0, orig = 0.0, term = 0.0;
            for (int a : topo.in_arcs[i]) in_flow += lm.arc_load[a];
            for (int a : topo.out_arcs[i]) out_flow += lm.arc_load[a];
            for (size_t d = 0; d < in.demands.size(); ++d) {
                if (topo.node(in.demands[d].origin) == i) orig += rates[d];
                if (topo.node(in.demands[d].destination) == i) term += rates[d];
            }
            CHECK(std::fabs(in_flow + orig - out_flow - term) <= 1e-9);
        }
    }
}

TEST_CASE("exact rational mode conserves flow with zero error") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        Instance in = testing::random_instance(seed);
        WeightSet w = WeightSet::from_instance(in);
        Topology topo = make_topology(in);
        std::vector<long long> rates;
        for (const Demand& d : in.demands) rates.push_back(llround(d.rate));
        auto lm = compute_ecmp_loads_exact(in, w, ActiveMask::all_on(in), rates);
        for (int i = 0; i < topo.num_nodes; ++i) {
            Rational acc(0);
            for (int a : topo.in_arcs[i]) acc = acc + lm.arc_load[a];
            for (int a : topo.out_arcs[i]) acc = acc + Rational(-lm.arc_load[a].num,
                                                                lm.arc_load[a].den);
            long long net = 0;
            for (size_t d = 0; d < in.demands.size(); ++d) {
                if (topo.node(in.demands[d].origin) == i) net += rates[d];
                if (topo.node(in.demands[d].destination) == i) net -= rates[d];
            }
            CHECK(acc + Rational(net) == Rational(0));
        }
    }
}

TEST_CASE("carrying shortest-path arcs receive equal shares") {
    for (uint64_t seed = 21; seed <= 30; ++seed) {
        Instance in = testing::random_instance(seed);
        WeightSet w = WeightSet::from_instance(in);
        ActiveMask mask = ActiveMask::all_on(in);
        Topology topo = make_topology(in);
        // single destination at a time so shares are attributable
        for (size_t d = 0; d < in.demands.size(); ++d) {
            std::vector<double> rates(in.demands.size(), 0.0);
            rates[d] = in.demands[d].rate;
            LoadMap lm = compute_ecmp_loads(in, w, mask, rates);
            int t = topo.node(in.demands[d].destination);
            auto dist = shortest_distances(in, w, t, mask);
            for (int i = 0; i < topo.num_nodes; ++i) {
                if (i == t) continue;
                std::vector<double> shares;
                for (int a : topo.out_arcs[i]) {
                    int j = topo.arcs[a].second;
                    if (!std::isfinite(dist[i]) || !std::isfinite(dist[j])) continue;
                    if (std::fabs(dist[i] - (w.omega[a] + dist[j])) <= 1e-9)
                        shares.push_back(lm.arc_load[a]);
                }
                for (size_t x = 1; x < shares.size(); ++x)
                    CHECK(std::fabs(shares[x] - shares[0]) <= 1e-9);
            }
        }
    }
}

TEST_CASE("chain has exactly one path regardless of K") {
    Instance in = chain_instance();
    auto paths = k_shortest_paths(in, WeightSet::from_instance(in), in.demands[0], 3);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0] == std::vector<int>{0, 1});
}

TEST_CASE("diamond yields both branches in lexicographic order") {
    Instance in = testing::diamond_instance();
    Demand d{"s", "t", 1.0, {}};
    auto paths = k_shortest_paths(in, WeightSet::from_instance(in), d, 2);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0] == std::vector<int>{0, 2});  // s>a, a>t
    CHECK(paths[1] == std::vector<int>{1, 3});  // s>b, b>t
}

TEST_CASE("complete digraph enumerates 1,2,2,3,3 path weights") {
    Instance in = complete4();
    WeightSet w = WeightSet::from_instance(in);
    auto paths = k_shortest_paths(in, w, in.demands[0], 5);
    REQUIRE(paths.size() == 5);
    std::vector<double> weights;
    for (auto& p : paths) weights.push_back(path_weight(w, p));
    CHECK(weights == std::vector<double>{1.0, 2.0, 2.0, 3.0, 3.0});
    // loopless: no repeated nodes
    Topology topo = make_topology(in);
    for (auto& p : paths) {
        std::set<int> seen{topo.node("A")};
        for (int a : p) CHECK(seen.insert(topo.arcs[a].second).second);
    }
}

TEST_CASE("routable accepts the all-on network and flags sleeping bottlenecks") {
    Instance in = chain_instance();
    std::vector<double> rates = {5.0};
    RouteCheck ok = routable(in, ActiveMask::all_on(in), rates, FeasMethod::lp());
    CHECK(ok.feasible);
    CHECK(ok.witness.arc_load[0] == doctest::Approx(5.0));
    ActiveMask mask = ActiveMask::all_on(in);
    mask.link_cards[0] = 0;
    CHECK_FALSE(routable(in, mask, rates, FeasMethod::lp()).feasible);
    CHECK_FALSE(routable(in, mask, rates, FeasMethod::ksp(2)).feasible);
}

TEST_CASE("lp sees the split that first-fit ksp cannot") {
    Instance in = testing::diamond_instance();
    in.demands[0].rate = 15.0;  // two 10-unit branches
    std::vector<double> rates = {15.0};
    CHECK(routable(in, ActiveMask::all_on(in), rates, FeasMethod::lp()).feasible);
    CHECK_FALSE(routable(in, ActiveMask::all_on(in), rates, FeasMethod::ksp(1)).feasible);
    CHECK_FALSE(routable(in, ActiveMask::all_on(in), rates, FeasMethod::ksp(2)).feasible);
}

TEST_CASE("a ksp witness is always lp-feasible") {
    for (uint64_t seed = 31; seed <= 45; ++seed) {
        Instance in = testing::random_instance(seed);
        std::vector<double> rates;
        for (const Demand& d : in.demands) rates.push_back(d.rate);
        RouteCheck k = routable(in, ActiveMask::all_on(in), rates, FeasMethod::ksp(3));
        if (!k.feasible) continue;
        RouteCheck l = routable(in, ActiveMask::all_on(in), rates, FeasMethod::lp());
        CHECK(l.feasible);
        Topology topo = make_topology(in);
        for (size_t a = 0; a < topo.arcs.size(); ++a)
            CHECK(k.witness.arc_load[a] <=
                  masked_capacity(in, ActiveMask::all_on(in), int(a)) + 1e-9);
    }
}

TEST_CASE("ecmp feasibility test matches direct propagation") {
    Instance in = testing::diamond_instance();
    std::vector<double> rates = {8.0};
    RouteCheck rc = routable(in, ActiveMask::all_on(in), rates,
                             FeasMethod::ecmp(WeightSet::from_instance(in)));
    REQUIRE(rc.feasible);
    CHECK(rc.witness.arc_load[0] == doctest::Approx(4.0));
    in.demands[0].rate = 30.0;  // splits 15/15 over 10-cap arcs: utilization fails
    rates = {30.0};
    CHECK_FALSE(routable(in, ActiveMask::all_on(in), rates,
                         FeasMethod::ecmp(WeightSet::from_instance(in)))
                    .feasible);
}

TEST_CASE("weight sets validate their domain") {
    Instance in = chain_instance();
    WeightSet w = WeightSet::from_instance(in);
    CHECK(w.check(in).empty());
    w.omega[0] = 0.5;
    CHECK_FALSE(w.check(in).empty());
    w.omega[0] = in.omega_max + 1.0;
    CHECK_FALSE(w.check(in).empty());
}
