// Shared fixtures for the test suites: canonical tiny instances, a seeded
// random-instance generator, and a brute-force LP vertex enumerator used as
// the independent oracle for simplex results.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <set>

#include "eanm/lp.hpp"
#include "eanm/model.hpp"

namespace testing {

using namespace eanm;

// Two routers joined by one link; the only feasible state costs 23 W.
inline Instance two_node_instance() {
    Instance in;
    in.name = "two_node";
    in.nodes = {{"A", 10.0, 0.0, {}}, {"B", 10.0, 0.0, {}}};
    LinkSpec ab;
    ab.from = "A";
    ab.to = "B";
    ab.card_capacity = 10.0;
    ab.num_cards = 1;
    ab.fixed_power = 3.0;
    in.links = {ab};
    in.demands = {{"A", "B", 5.0, {}}};
    return in;
}

// Direct arc plus a two-hop detour; optimum keeps only the direct arc on.
inline Instance triangle_instance() {
    Instance in;
    in.name = "triangle";
    in.nodes = {{"A", 0.0, 0.0, {}}, {"B", 0.0, 0.0, {}}, {"C", 0.0, 0.0, {}}};
    auto arc = [](std::string u, std::string v) {
        LinkSpec l;
        l.from = std::move(u);
        l.to = std::move(v);
        l.card_capacity = 10.0;
        l.fixed_power = 1.0;
        return l;
    };
    in.links = {arc("A", "B"), arc("A", "C"), arc("C", "B")};
    in.demands = {{"A", "B", 4.0, {}}};
    return in;
}

// s -> {a,b} -> t with equal capacities.
inline Instance diamond_instance(double cap = 10.0, double link_power = 1.0) {
    Instance in;
    in.name = "diamond";
    for (std::string id : {"s", "a", "b", "t"}) in.nodes.push_back({id, 0.0, 0.0, {}});
    auto arc = [&](std::string u, std::string v) {
        LinkSpec l;
        l.from = std::move(u);
        l.to = std::move(v);
        l.card_capacity = cap;
        l.fixed_power = link_power;
        l.weight = 1.0;
        return l;
    };
    in.links = {arc("s", "a"), arc("s", "b"), arc("a", "t"), arc("b", "t")};
    in.demands = {{"s", "t", 8.0, {}}};
    return in;
}

// Bidirectional ring over n nodes, demand across the ring.
inline Instance ring_instance(int n, double cap = 10.0, double link_power = 1.0,
                              double node_power = 1.0) {
    Instance in;
    in.name = "ring" + std::to_string(n);
    for (int i = 0; i < n; ++i)
        in.nodes.push_back({"N" + std::to_string(i), node_power, 0.0, {}});
    auto arc = [&](int u, int v) {
        LinkSpec l;
        l.from = "N" + std::to_string(u);
        l.to = "N" + std::to_string(v);
        l.card_capacity = cap;
        l.fixed_power = link_power;
        return l;
    };
    for (int i = 0; i < n; ++i) {
        in.links.push_back(arc(i, (i + 1) % n));
        in.links.push_back(arc((i + 1) % n, i));
    }
    in.demands = {{"N0", "N" + std::to_string(n / 2), 2.0, {}}};
    return in;
}

struct RandomSpec {
    int max_nodes = 5;
    int max_arcs = 8;
    int max_demands = 4;
    int max_cards = 2;
    bool with_slopes = false;
};

// Seeded generator: a directed ring (so every pair is connected) plus random
// chords, random power figures, and small demands that always fit when all
// devices are on.
inline Instance random_instance(uint64_t seed, RandomSpec spec = {}) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) {
        return static_cast<int>(lo + rng() % static_cast<uint64_t>(hi - lo + 1));
    };
    Instance in;
    in.name = "rand" + std::to_string(seed);
    int n = pick(3, spec.max_nodes);
    for (int i = 0; i < n; ++i) {
        double np = static_cast<double>(pick(0, 8));
        in.nodes.push_back({"N" + std::to_string(i), np, 0.0, {}});
    }
    std::set<std::pair<int, int>> used;
    auto add_arc = [&](int u, int v) {
        if (u == v || used.count({u, v})) return;
        used.insert({u, v});
        LinkSpec l;
        l.from = "N" + std::to_string(u);
        l.to = "N" + std::to_string(v);
        l.card_capacity = static_cast<double>(pick(8, 16));
        l.num_cards = pick(1, spec.max_cards);
        l.max_utilization = (rng() % 4 == 0) ? 0.9 : 1.0;
        l.fixed_power = static_cast<double>(pick(1, 5));
        if (spec.with_slopes && rng() % 3 == 0) l.per_unit_power = 0.1;
        in.links.push_back(l);
    };
    for (int i = 0; i < n; ++i) add_arc(i, (i + 1) % n);
    int extra = pick(0, spec.max_arcs - n);
    for (int k = 0; k < extra; ++k) add_arc(pick(0, n - 1), pick(0, n - 1));
    int nd = pick(1, spec.max_demands);
    for (int k = 0; k < nd; ++k) {
        int o = pick(0, n - 1);
        int t = pick(0, n - 1);
        if (o == t) t = (t + 1) % n;
        Demand d;
        d.origin = "N" + std::to_string(o);
        d.destination = "N" + std::to_string(t);
        d.rate = static_cast<double>(pick(1, 3));
        in.demands.push_back(d);
    }
    return in;
}

// ---------------------------------------------------------------------------
// Independent LP oracle: enumerate all candidate vertices by activating every
// size-n subset of {rows as equalities} U {variable bounds} and keep the best
// feasible point. Exponential, only for toy programs.
// ---------------------------------------------------------------------------

inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
    int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        double best = 1e-9;
        for (int r = col; r < n; ++r)
            if (std::fabs(a[r][col]) > best) {
                best = std::fabs(a[r][col]);
                piv = r;
            }
        if (piv < 0) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

struct VertexOptimum {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> point;
};

inline VertexOptimum enumerate_vertex_optimum(const LinearProgram& lp) {
    int n = static_cast<int>(lp.variables.size());
    struct Plane {
        std::vector<double> a;
        double b;
    };
    std::vector<Plane> planes;
    for (const LpRow& r : lp.rows) {
        Plane p{std::vector<double>(n, 0.0), r.rhs};
        for (auto& [j, c] : r.coeffs) p.a[j] += c;
        planes.push_back(std::move(p));
    }
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(lp.variables[j].lower)) {
            Plane p{std::vector<double>(n, 0.0), lp.variables[j].lower};
            p.a[j] = 1.0;
            planes.push_back(std::move(p));
        }
        if (std::isfinite(lp.variables[j].upper)) {
            Plane p{std::vector<double>(n, 0.0), lp.variables[j].upper};
            p.a[j] = 1.0;
            planes.push_back(std::move(p));
        }
    }
    int total = static_cast<int>(planes.size());
    VertexOptimum best;
    std::vector<int> idx(n);
    auto feasible = [&](const std::vector<double>& x) {
        for (int j = 0; j < n; ++j) {
            if (x[j] < lp.variables[j].lower - 1e-7) return false;
            if (x[j] > lp.variables[j].upper + 1e-7) return false;
        }
        for (const LpRow& r : lp.rows) {
            double act = 0.0;
            for (auto& [j, c] : r.coeffs) act += c * x[j];
            if (r.relation == Relation::LessEqual && act > r.rhs + 1e-7) return false;
            if (r.relation == Relation::GreaterEqual && act < r.rhs - 1e-7) return false;
            if (r.relation == Relation::Equal && std::fabs(act - r.rhs) > 1e-7) return false;
        }
        return true;
    };
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n) {
            std::vector<std::vector<double>> a;
            std::vector<double> b;
            for (int k = 0; k < n; ++k) {
                a.push_back(planes[idx[k]].a);
                b.push_back(planes[idx[k]].b);
            }
            std::vector<double> x;
            if (!solve_square(a, b, x) || !feasible(x)) return;
            double obj = 0.0;
            for (int j = 0; j < n; ++j) obj += lp.variables[j].objective * x[j];
            if (!best.feasible || obj < best.objective) {
                best.feasible = true;
                best.objective = obj;
                best.point = x;
            }
            return;
        }
        for (int k = start; k < total; ++k) {
            idx[depth] = k;
            rec(k + 1, depth + 1);
        }
    };
    if (n > 0 && total >= n) rec(0, 0);
    return best;
}

}  // namespace testing
