// Generic linear-program container and an exact bounded-variable primal
// simplex. Dense tableau, two phases with artificials, Bland fallback for
// anti-cycling, and an explicit duality-gap certificate on every optimum.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eanm/model.hpp"  // Error, kInf

namespace eanm {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LpVariable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    double objective = 0.0;
};

struct LpRow {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;  // sparse (variable index, value)
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

/// Minimization LP. Rows are stored sparse; variables carry their bounds and
/// objective coefficient directly.
struct LinearProgram {
    std::vector<LpVariable> variables;
    std::vector<LpRow> rows;

    int add_variable(std::string name, double lb, double ub, double obj) {
        int idx = static_cast<int>(variables.size());
        if (!index_.emplace(name, idx).second)
            throw Error("duplicate variable name: " + name);
        variables.push_back({std::move(name), lb, ub, obj});
        return idx;
    }

    int add_row(std::string name, Relation rel, double rhs,
                std::vector<std::pair<int, double>> coeffs) {
        int idx = static_cast<int>(rows.size());
        if (!row_index_.emplace(name, idx).second)
            throw Error("duplicate row name: " + name);
        rows.push_back({std::move(name), std::move(coeffs), rel, rhs});
        return idx;
    }

    int variable_index(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    int row_index(const std::string& name) const {
        auto it = row_index_.find(name);
        return it == row_index_.end() ? -1 : it->second;
    }

    std::vector<std::string> check() const {
        std::vector<std::string> bad;
        for (const LpVariable& v : variables) {
            if (!(v.lower <= v.upper))
                bad.push_back("variable " + v.name + ": lower bound exceeds upper bound");
            if (std::isnan(v.lower) || std::isnan(v.upper) || !std::isfinite(v.objective))
                bad.push_back("variable " + v.name + ": non-finite data");
        }
        for (const LpRow& r : rows) {
            if (!std::isfinite(r.rhs)) bad.push_back("row " + r.name + ": non-finite rhs");
            for (auto& [j, c] : r.coeffs) {
                if (j < 0 || j >= static_cast<int>(variables.size()))
                    bad.push_back("row " + r.name + ": coefficient references unknown variable");
                else if (!std::isfinite(c))
                    bad.push_back("row " + r.name + ": non-finite coefficient");
            }
        }
        return bad;
    }

  private:
    std::unordered_map<std::string, int> index_;
    std::unordered_map<std::string, int> row_index_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, SolverFailure };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::SolverFailure: return "solver-failure";
    }
    return "?";
}

struct LpSolution {
    LpStatus status = LpStatus::SolverFailure;
    double objective = 0.0;
    std::vector<double> values;  // per variable
    std::vector<double> duals;   // per row, convention: reduced cost = c - A^T y
    double duality_gap = 0.0;
    long iterations = 0;
    std::string detail;
};

namespace detail {

// Bounded-variable simplex working state. Columns are laid out as
// [structural | slack | artificial]; every slack enters its row with
// coefficient +1 and the row sense is encoded in the slack bounds.
class Simplex {
  public:
    Simplex(const LinearProgram& lp, double tol) : lp_(lp), tol_(tol) {
        m_ = static_cast<int>(lp.rows.size());
        ns_ = static_cast<int>(lp.variables.size());
        ncol_ = ns_ + m_;  // artificials appended later
        lower_.resize(ncol_);
        upper_.resize(ncol_);
        for (int j = 0; j < ns_; ++j) {
            lower_[j] = lp.variables[j].lower;
            upper_[j] = lp.variables[j].upper;
        }
        for (int i = 0; i < m_; ++i) {
            switch (lp.rows[i].relation) {
                case Relation::LessEqual:    lower_[ns_ + i] = 0.0;   upper_[ns_ + i] = kInf; break;
                case Relation::GreaterEqual: lower_[ns_ + i] = -kInf; upper_[ns_ + i] = 0.0;  break;
                case Relation::Equal:        lower_[ns_ + i] = 0.0;   upper_[ns_ + i] = 0.0;  break;
            }
        }
        rhs_.resize(m_);
        dense_.assign(static_cast<size_t>(m_) * ncol_, 0.0);
        for (int i = 0; i < m_; ++i) {
            rhs_[i] = lp.rows[i].rhs;
            for (auto& [j, c] : lp.rows[i].coeffs) at(i, j) += c;
            at(i, ns_ + i) = 1.0;
        }
    }

    LpSolution run() {
        LpSolution out;
        setup_start();
        long budget = 400 + 40L * (m_ + ncol_);
        // Phase 1: minimize the artificial sum.
        if (nart_ > 0) {
            std::vector<double> phase1(cols(), 0.0);
            for (int j = ns_ + m_; j < cols(); ++j) phase1[j] = 1.0;
            Outcome o = iterate(phase1, budget, out.iterations);
            if (o == Outcome::IterationLimit) return fail(out, "phase-1 iteration cap hit");
            double infeas = 0.0;
            for (int i = 0; i < m_; ++i)
                if (basis_[i] >= ns_ + m_) infeas += xb_[i];
            if (infeas > tol_ * (1.0 + std::fabs(norm1(rhs_)))) {
                out.status = LpStatus::Infeasible;
                out.detail = "phase-1 optimum " + std::to_string(infeas);
                return out;
            }
            pin_artificials();
        }
        // Phase 2 on the true objective.
        std::vector<double> cost(cols(), 0.0);
        for (int j = 0; j < ns_; ++j) cost[j] = lp_.variables[j].objective;
        Outcome o = iterate(cost, budget, out.iterations);
        if (o == Outcome::IterationLimit) return fail(out, "phase-2 iteration cap hit");
        if (o == Outcome::Unbounded) {
            out.status = LpStatus::Unbounded;
            return out;
        }
        return certify(cost, out);
    }

  private:
    enum class Outcome { Optimal, Unbounded, IterationLimit };

    const LinearProgram& lp_;
    double tol_;
    int m_ = 0, ns_ = 0, ncol_ = 0, nart_ = 0;
    std::vector<double> dense_;   // m x cols() tableau, row-major
    std::vector<double> rhs_;
    std::vector<double> lower_, upper_;
    std::vector<int> basis_;      // per row: basic column
    std::vector<double> xb_;      // per row: basic value
    std::vector<int8_t> nb_at_upper_;  // per column: nonbasic rests at upper bound
    std::vector<int8_t> in_basis_;
    std::vector<double> xn_;      // per column: resting value when nonbasic

    int cols() const { return ncol_ + nart_; }
    double& at(int i, int j) { return dense_[static_cast<size_t>(i) * cols() + j]; }
    double at(int i, int j) const { return dense_[static_cast<size_t>(i) * cols() + j]; }

    static double norm1(const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += std::fabs(x);
        return s;
    }

    double resting_value(int j) const {
        if (std::isfinite(lower_[j])) return lower_[j];
        if (std::isfinite(upper_[j])) return upper_[j];
        return 0.0;
    }

    void setup_start() {
        // Nonbasic columns rest at a finite bound; slacks whose implied value
        // fits their bounds form the starting basis, the rest get artificials.
        xn_.resize(ncol_);
        nb_at_upper_.assign(ncol_, 0);
        for (int j = 0; j < ncol_; ++j) {
            xn_[j] = resting_value(j);
            nb_at_upper_[j] = (!std::isfinite(lower_[j]) && std::isfinite(upper_[j])) ? 1 : 0;
        }
        std::vector<double> residual(rhs_);
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < ns_; ++j)
                if (at(i, j) != 0.0) residual[i] -= at(i, j) * xn_[j];
        basis_.assign(m_, -1);
        xb_.assign(m_, 0.0);
        std::vector<int> needs_artificial;
        for (int i = 0; i < m_; ++i) {
            int s = ns_ + i;
            double v = residual[i];
            if (v >= lower_[s] - tol_ && v <= upper_[s] + tol_) {
                basis_[i] = s;
                xb_[i] = v;
            } else {
                // Slack pinned at the bound nearest the residual; artificial
                // covers the remainder with a +/-1 column so the start basis
                // stays triangular.
                double pin = (v < lower_[s]) ? lower_[s] : upper_[s];
                xn_[s] = pin;
                nb_at_upper_[s] = (pin == upper_[s] && lower_[s] != upper_[s]) ? 1 : 0;
                needs_artificial.push_back(i);
            }
        }
        nart_ = static_cast<int>(needs_artificial.size());
        if (nart_ > 0) {
            int old_cols = ncol_;
            std::vector<double> wide(static_cast<size_t>(m_) * (old_cols + nart_), 0.0);
            for (int i = 0; i < m_; ++i)
                for (int j = 0; j < old_cols; ++j)
                    wide[static_cast<size_t>(i) * (old_cols + nart_) + j] =
                        dense_[static_cast<size_t>(i) * old_cols + j];
        dense_.swap(wide);
            lower_.resize(old_cols + nart_, 0.0);
            upper_.resize(old_cols + nart_, kInf);
            xn_.resize(old_cols + nart_, 0.0);
            nb_at_upper_.resize(old_cols + nart_, 0);
            for (int k = 0; k < nart_; ++k) {
                int i = needs_artificial[k];
                double v = residual[i] - xn_[ns_ + i];
                int col = old_cols + k;
                at(i, col) = (v >= 0.0) ? 1.0 : -1.0;
                basis_[i] = col;
                xb_[i] = std::fabs(v);
            }
        }
        in_basis_.assign(cols(), 0);
        for (int i = 0; i < m_; ++i) in_basis_[basis_[i]] = 1;
        // Row-reduce rows whose basic slack coefficient is 1 already: nothing
        // to do, the start tableau is the original matrix (basis is diagonal
        // +/-1). Normalize artificial rows with -1 pivots.
        for (int i = 0; i < m_; ++i) {
            if (at(i, basis_[i]) < 0.0)
                for (int j = 0; j < cols(); ++j) at(i, j) = -at(i, j);
        }
    }

    void pin_artificials() {
        // Fix artificials to zero; drive basic ones out where a real pivot
        // exists, otherwise the row is redundant and they stay at value 0.
        for (int j = ncol_; j < cols(); ++j) {
            lower_[j] = 0.0;
            upper_[j] = 0.0;
            if (!in_basis_[j]) xn_[j] = 0.0;
        }
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < ncol_) continue;
            int enter = -1;
            for (int j = 0; j < ncol_; ++j) {
                if (in_basis_[j] || lower_[j] == upper_[j]) continue;
                if (std::fabs(at(i, j)) > 1e-9) { enter = j; break; }
            }
            if (enter >= 0) {
                // Degenerate swap: the artificial sits at zero, so the entering
                // column keeps its resting value and no basic value moves.
                int leaving = basis_[i];
                in_basis_[leaving] = 0;
                xn_[leaving] = 0.0;
                pivot(i, enter);
                xb_[i] = xn_[enter];
            }
        }
    }

    // One simplex phase. Dantzig pricing with a Bland fallback once the
    // degenerate-pivot budget is spent.
    Outcome iterate(const std::vector<double>& cost, long budget, long& iters) {
        long bland_after = budget / 2;
        for (long it = 0; it < budget; ++it) {
            ++iters;
            std::vector<double> y = basic_prices(cost);
            int enter = -1, dir = 0;
            double best_score = tol_;
            bool bland = it >= bland_after;
            for (int j = 0; j < cols(); ++j) {
                if (in_basis_[j] || lower_[j] == upper_[j]) continue;
                double d = reduced_cost(cost, y, j);
                int candidate_dir = 0;
                if (!nb_at_upper_[j] && d < -tol_) candidate_dir = +1;
                else if (nb_at_upper_[j] && d > tol_) candidate_dir = -1;
                else if (!std::isfinite(lower_[j]) && !std::isfinite(upper_[j]) &&
                         std::fabs(d) > tol_)
                    candidate_dir = d > 0 ? -1 : +1;
                if (candidate_dir == 0) continue;
                if (bland) { enter = j; dir = candidate_dir; break; }
                if (std::fabs(d) > best_score) {
                    best_score = std::fabs(d);
                    enter = j;
                    dir = candidate_dir;
                }
            }
            if (enter < 0) return Outcome::Optimal;
            if (!ratio_step(enter, dir)) return Outcome::Unbounded;
        }
        return Outcome::IterationLimit;
    }

    std::vector<double> basic_prices(const std::vector<double>& cost) const {
        // y such that reduced costs of basic columns vanish: since the tableau
        // is kept fully reduced (basic columns are unit), y_i = cost[basis_[i]]
        // against the *current* tableau rows.
        std::vector<double> y(m_);
        for (int i = 0; i < m_; ++i) y[i] = cost[basis_[i]];
        return y;
    }

    double reduced_cost(const std::vector<double>& cost, const std::vector<double>& y,
                        int j) const {
        double d = cost[j];
        for (int i = 0; i < m_; ++i) {
            double a = at(i, j);
            if (a != 0.0) d -= y[i] * a;
        }
        return d;
    }

    // Move the entering column in direction dir (+1 up from lower, -1 down
    // from upper); pivot or bound-flip depending on the blocking constraint.
    bool ratio_step(int enter, int dir) {
        double limit = kInf;
        int leave_row = -1;
        int leave_to_upper = 0;
        double span = upper_[enter] - lower_[enter];
        if (std::isfinite(span)) limit = span;
        for (int i = 0; i < m_; ++i) {
            double a = at(i, enter) * dir;
            if (std::fabs(a) < 1e-11) continue;
            int b = basis_[i];
            double t;
            int to_upper;
            if (a > 0.0) {  // basic value decreases
                if (!std::isfinite(lower_[b])) continue;
                t = (xb_[i] - lower_[b]) / a;
                to_upper = 0;
            } else {  // basic value increases
                if (!std::isfinite(upper_[b])) continue;
                t = (xb_[i] - upper_[b]) / a;
                to_upper = 1;
            }
            if (t < -1e-9) t = 0.0;
            if (t < limit - 1e-12 ||
                (t < limit + 1e-12 && leave_row >= 0 && basis_[i] < basis_[leave_row])) {
                limit = t;
                leave_row = i;
                leave_to_upper = to_upper;
            }
        }
        if (!std::isfinite(limit)) return false;
        if (limit < 0.0) limit = 0.0;
        double step = dir * limit;
        for (int i = 0; i < m_; ++i)
            if (at(i, enter) != 0.0) xb_[i] -= at(i, enter) * step;
        if (leave_row < 0) {
            // Bound flip: entering variable crosses to its other bound.
            xn_[enter] += step;
            nb_at_upper_[enter] = dir > 0 ? 1 : 0;
            return true;
        }
        int leave = basis_[leave_row];
        double enter_value = xn_[enter] + step;
        xn_[leave] = leave_to_upper ? upper_[leave] : lower_[leave];
        nb_at_upper_[leave] = static_cast<int8_t>(leave_to_upper);
        in_basis_[leave] = 0;
        pivot(leave_row, enter);
        xb_[leave_row] = enter_value;
        return true;
    }

    void pivot(int row, int col) {
        double p = at(row, col);
        for (int j = 0; j < cols(); ++j) at(row, j) /= p;
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            double f = at(i, col);
            if (f == 0.0) continue;
            for (int j = 0; j < cols(); ++j) at(i, j) -= f * at(row, j);
            at(i, col) = 0.0;
        }
        basis_[row] = col;
        in_basis_[col] = 1;
    }

    LpSolution fail(LpSolution out, std::string why) {
        out.status = LpStatus::SolverFailure;
        out.detail = std::move(why);
        return out;
    }

    // Recompute everything from the original data and certify the claimed
    // optimum: primal feasibility, dual feasibility, and the duality gap.
    LpSolution certify(const std::vector<double>& cost, LpSolution out) {
        std::vector<double> x(ns_);
        for (int j = 0; j < ns_; ++j) x[j] = in_basis_[j] ? 0.0 : xn_[j];
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < ns_) x[basis_[i]] = xb_[i];
        double scale = 1.0;
        for (int j = 0; j < ns_; ++j) scale = std::max(scale, std::fabs(x[j]));
        double feas_tol = tol_ * 10.0 * scale;
        for (int j = 0; j < ns_; ++j) {
            if (x[j] < lp_.variables[j].lower - feas_tol ||
                x[j] > lp_.variables[j].upper + feas_tol)
                return fail(std::move(out), "primal bound violated on " + lp_.variables[j].name);
            x[j] = std::min(std::max(x[j], lp_.variables[j].lower), lp_.variables[j].upper);
        }
        double primal = 0.0;
        for (int j = 0; j < ns_; ++j) primal += lp_.variables[j].objective * x[j];
        for (int i = 0; i < m_; ++i) {
            double act = 0.0;
            for (auto& [j, c] : lp_.rows[i].coeffs) act += c * x[j];
            const LpRow& r = lp_.rows[i];
            double rtol = feas_tol * (1.0 + std::fabs(r.rhs));
            if (r.relation == Relation::LessEqual && act > r.rhs + rtol)
                return fail(std::move(out), "row " + r.name + " violated");
            if (r.relation == Relation::GreaterEqual && act < r.rhs - rtol)
                return fail(std::move(out), "row " + r.name + " violated");
            if (r.relation == Relation::Equal && std::fabs(act - r.rhs) > rtol)
                return fail(std::move(out), "row " + r.name + " violated");
        }
        // Duals off the final tableau; slack column i of the tableau carries
        // B^-1 e_i, so pricing those columns yields y directly.
        std::vector<double> y(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double yi = 0.0;
            for (int k = 0; k < m_; ++k) {
                double a = at(k, ns_ + i);
                if (a != 0.0) yi += cost[basis_[k]] * a;
            }
            y[i] = yi;
        }
        // Dual objective: y'b plus the bound terms picked by reduced-cost sign.
        double dual = 0.0;
        for (int i = 0; i < m_; ++i) dual += y[i] * lp_.rows[i].rhs;
        std::vector<double> redcost(ns_);
        for (int j = 0; j < ns_; ++j) redcost[j] = lp_.variables[j].objective;
        for (int i = 0; i < m_; ++i)
            for (auto& [j, c] : lp_.rows[i].coeffs) redcost[j] -= y[i] * c;
        double dual_tol = tol_ * 100.0 * (1.0 + std::fabs(primal));
        for (int j = 0; j < ns_; ++j) {
            double d = redcost[j];
            if (d > tol_ * 10.0) {
                if (!std::isfinite(lp_.variables[j].lower))
                    return fail(std::move(out), "dual sign violated on " + lp_.variables[j].name);
                dual += d * lp_.variables[j].lower;
            } else if (d < -tol_ * 10.0) {
                if (!std::isfinite(lp_.variables[j].upper))
                    return fail(std::move(out), "dual sign violated on " + lp_.variables[j].name);
                dual += d * lp_.variables[j].upper;
            }
        }
        for (int i = 0; i < m_; ++i) {
            double d = -y[i];  // reduced cost of slack i (cost 0, coefficient +1)
            int s = ns_ + i;
            if (d > tol_ * 10.0) {
                if (!std::isfinite(lower_[s]))
                    return fail(std::move(out), "dual sign violated on row " + lp_.rows[i].name);
                dual += d * lower_[s];
            } else if (d < -tol_ * 10.0) {
                if (!std::isfinite(upper_[s]))
                    return fail(std::move(out), "dual sign violated on row " + lp_.rows[i].name);
                dual += d * upper_[s];
            }
        }
        out.duality_gap = std::fabs(primal - dual);
        if (out.duality_gap > dual_tol)
            return fail(std::move(out), "duality gap " + std::to_string(out.duality_gap));
        out.status = LpStatus::Optimal;
        out.objective = primal;
        out.values = std::move(x);
        out.duals = std::move(y);
        return out;
    }
};

}  // namespace detail

/// Solves the LP to proven optimality. `status` is trustworthy: an Optimal
/// answer carries a verified primal point and a duality gap below tolerance;
/// anything the solver cannot certify comes back as SolverFailure, never as a
/// silently wrong answer.
inline LpSolution solve_lp(const LinearProgram& lp, double tolerance = 1e-7) {
    auto bad = lp.check();
    if (!bad.empty()) throw Error("malformed LP: " + bad.front());
    for (const LpVariable& v : lp.variables) {
        if (v.lower > v.upper) throw Error("variable " + v.name + ": empty bound interval");
    }
    if (lp.rows.empty() && lp.variables.empty()) {
        LpSolution s;
        s.status = LpStatus::Optimal;
        return s;
    }
    detail::Simplex s(lp, tolerance);
    return s.run();
}

}  // namespace eanm
