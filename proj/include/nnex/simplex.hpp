#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nnex/linear.hpp"
#include "nnex/rational.hpp"

namespace nnex {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Rational objective;
    Vec solution;  // values of the original free variables
};

namespace detail {

/// Dense two-phase tableau simplex over exact rationals, Bland's rule
/// for anti-cycling. Free variables are split into nonnegative pairs.
/// Accepts >= and = rows; strict rows are the caller's business (see
/// lp_feasible).
class SimplexTableau {
public:
    SimplexTableau(const LinearSystem& sys, const Vec& objective) : n_(sys.dimension) {
        if (objective.size() != n_) throw std::invalid_argument("objective dimension mismatch");
        const size_t m = sys.rows.size();
        n_struct_ = 2 * n_;
        // slack layout: one surplus column per inequality row
        size_t n_slack = 0;
        for (const auto& r : sys.rows)
            if (r.sense != Sense::eq) ++n_slack;
        n_cols_ = n_struct_ + n_slack + m;  // + one artificial per row (some unused)
        art_begin_ = n_struct_ + n_slack;

        tab_.assign(m, std::vector<Rational>(n_cols_ + 1, Rational(0)));
        basis_.assign(m, 0);
        std::vector<char> art_used(m, 0);

        size_t slack_col = n_struct_;
        for (size_t i = 0; i < m; ++i) {
            const auto& row = sys.rows[i];
            if (row.sense == Sense::gt)
                throw std::invalid_argument("simplex cannot take strict rows directly");
            Rational sgn = Rational(1);
            // Make the right-hand side nonnegative up front.
            if (row.rhs < Rational(0)) sgn = Rational(-1);
            for (size_t j = 0; j < n_; ++j) {
                Rational a = sgn * row.coeffs[j];
                tab_[i][2 * j] = a;
                tab_[i][2 * j + 1] = -a;
            }
            tab_[i][n_cols_] = sgn * row.rhs;
            if (row.sense == Sense::ge) {
                // a^T z - s = b, s >= 0 (sign flips with the row)
                tab_[i][slack_col] = -sgn;
                if (sgn < Rational(0)) {
                    // became a <= row; its slack enters the basis directly
                    basis_[i] = slack_col;
                } else {
                    basis_[i] = art_begin_ + i;
                    art_used[i] = 1;
                }
                ++slack_col;
            } else {
                basis_[i] = art_begin_ + i;
                art_used[i] = 1;
            }
            if (art_used[i]) tab_[i][art_begin_ + i] = Rational(1);
        }

        // Phase 1: maximize -sum(artificials).
        Vec phase1_cost(n_cols_, Rational(0));
        for (size_t i = 0; i < m; ++i)
            if (art_used[i]) phase1_cost[art_begin_ + i] = Rational(-1);
        run(phase1_cost, /*allow_artificials=*/true);
        if (current_objective(phase1_cost) < Rational(0)) {
            status_ = LpStatus::infeasible;
            return;
        }
        for (size_t i = 0; i < m; ++i) {
            if (basis_[i] >= art_begin_) pivot_artificial_out(i);
        }

        // Phase 2: the real objective over the split variables.
        Vec cost(n_cols_, Rational(0));
        for (size_t j = 0; j < n_; ++j) {
            cost[2 * j] = objective[j];
            cost[2 * j + 1] = -objective[j];
        }
        status_ = run(cost, /*allow_artificials=*/false);
        if (status_ == LpStatus::optimal) {
            objective_ = current_objective(cost);
            solution_.assign(n_, Rational(0));
            for (size_t i = 0; i < tab_.size(); ++i) {
                size_t b = basis_[i];
                if (b < n_struct_) {
                    Rational v = tab_[i][n_cols_];
                    if (b % 2 == 0)
                        solution_[b / 2] += v;
                    else
                        solution_[b / 2] -= v;
                }
            }
        }
    }

    LpStatus status() const { return status_; }
    const Rational& objective() const { return objective_; }
    const Vec& solution() const { return solution_; }

private:
    Rational current_objective(const Vec& cost) const {
        Rational v(0);
        for (size_t i = 0; i < tab_.size(); ++i) v += cost[basis_[i]] * tab_[i][n_cols_];
        return v;
    }

    // Reduced cost of column j under the given cost vector.
    Rational reduced_cost(const Vec& cost, size_t j) const {
        Rational r = cost[j];
        for (size_t i = 0; i < tab_.size(); ++i) r -= cost[basis_[i]] * tab_[i][j];
        return r;
    }

    void pivot(size_t row, size_t col) {
        Rational p = tab_[row][col];
        for (auto& v : tab_[row]) v /= p;
        for (size_t i = 0; i < tab_.size(); ++i) {
            if (i == row) continue;
            Rational f = tab_[i][col];
            if (f == Rational(0)) continue;
            for (size_t j = 0; j <= n_cols_; ++j) tab_[i][j] -= f * tab_[row][j];
        }
        basis_[row] = col;
    }

    void pivot_artificial_out(size_t row) {
        for (size_t j = 0; j < art_begin_; ++j) {
            if (tab_[row][j] != Rational(0)) {
                pivot(row, j);
                return;
            }
        }
        // All-zero row: redundant constraint, the artificial stays basic
        // at zero and never constrains a ratio test.
    }

    LpStatus run(const Vec& cost, bool allow_artificials) {
        const size_t limit = art_begin_ + (allow_artificials ? tab_.size() : 0);
        for (size_t iter = 0;; ++iter) {
            if (iter > kPivotCap) throw std::logic_error("simplex pivot cap exceeded");
            // Bland: lowest-index improving column.
            size_t enter = n_cols_;
            for (size_t j = 0; j < limit; ++j) {
                if (!allow_artificials && j >= art_begin_) break;
                if (reduced_cost(cost, j) > Rational(0)) {
                    enter = j;
                    break;
                }
            }
            if (enter == n_cols_) return LpStatus::optimal;
            size_t leave = tab_.size();
            Rational best_ratio(0);
            for (size_t i = 0; i < tab_.size(); ++i) {
                if (tab_[i][enter] <= Rational(0)) continue;
                Rational ratio = tab_[i][n_cols_] / tab_[i][enter];
                if (leave == tab_.size() || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == tab_.size()) return LpStatus::unbounded;
            pivot(leave, enter);
        }
    }

    static constexpr size_t kPivotCap = 200000;

    size_t n_ = 0, n_struct_ = 0, n_cols_ = 0, art_begin_ = 0;
    std::vector<std::vector<Rational>> tab_;
    std::vector<size_t> basis_;
    LpStatus status_ = LpStatus::infeasible;
    Rational objective_;
    Vec solution_;
};

}  // namespace detail

/// Exact maximization of c^T z over {z : rows}, z free. Rows may be
/// >= or =.
inline LpResult lp_maximize(const LinearSystem& sys, const Vec& objective) {
    // Constant rows are decided up front; the tableau dislikes them.
    LinearSystem reduced;
    reduced.dimension = sys.dimension;
    for (const auto& r : sys.rows) {
        if (r.is_constant()) {
            if (!r.constant_holds()) return {LpStatus::infeasible, Rational(0), {}};
        } else {
            reduced.rows.push_back(r);
        }
    }
    if (reduced.rows.empty()) {
        bool zero_cost = std::all_of(objective.begin(), objective.end(),
                                     [](const Rational& c) { return c == Rational(0); });
        if (!zero_cost) return {LpStatus::unbounded, Rational(0), Vec(sys.dimension, Rational(0))};
        return {LpStatus::optimal, Rational(0), Vec(sys.dimension, Rational(0))};
    }
    detail::SimplexTableau t(reduced, objective);
    return {t.status(), t.objective(), t.solution()};
}

/// Feasibility of a mixed system with =, >= and strict > rows.
struct FeasibilityResult {
    enum class Status { feasible, infeasible, indeterminate };
    Status status = Status::infeasible;
    std::optional<Vec> witness;
    std::optional<Rational> slack;  // achieved epsilon for strict systems

    bool feasible() const { return status == Status::feasible; }
};

/// Decides feasibility exactly. Strict rows go through the epsilon
/// trick: every row l > b becomes l >= b + eps and eps is maximized
/// (clamped at 1); the system is strictly feasible iff the optimum is
/// positive. Inputs are rational, so the verdict is symbolic; the
/// indeterminate status exists for callers that feed approximate data.
inline FeasibilityResult lp_feasible(const LinearSystem& sys) {
    LinearSystem work;
    work.dimension = sys.dimension;
    bool any_strict = false;
    for (const auto& r : sys.rows) {
        if (r.is_constant()) {
            if (!r.constant_holds()) return {};
            continue;
        }
        work.rows.push_back(r);
        any_strict = any_strict || (r.sense == Sense::gt);
    }

    FeasibilityResult res;
    if (work.rows.empty()) {
        res.status = FeasibilityResult::Status::feasible;
        res.witness = Vec(sys.dimension, Rational(0));
        return res;
    }

    if (!any_strict) {
        LpResult lp = lp_maximize(work, Vec(work.dimension, Rational(0)));
        if (lp.status != LpStatus::optimal) return {};
        res.status = FeasibilityResult::Status::feasible;
        res.witness = lp.solution;
    } else {
        // Extended system over (z, eps).
        LinearSystem ext;
        ext.dimension = work.dimension + 1;
        for (const auto& r : work.rows) {
            LinearInequality e;
            e.coeffs = r.coeffs;
            e.coeffs.push_back(r.sense == Sense::gt ? Rational(-1) : Rational(0));
            e.rhs = r.rhs;
            e.sense = (r.sense == Sense::eq) ? Sense::eq : Sense::ge;
            ext.rows.push_back(std::move(e));
        }
        LinearInequality cap;  // eps <= 1
        cap.coeffs.assign(ext.dimension, Rational(0));
        cap.coeffs.back() = Rational(-1);
        cap.rhs = Rational(-1);
        ext.rows.push_back(std::move(cap));

        Vec obj(ext.dimension, Rational(0));
        obj.back() = Rational(1);
        LpResult lp = lp_maximize(ext, obj);
        if (lp.status == LpStatus::unbounded) throw std::logic_error("eps LP cannot be unbounded");
        if (lp.status != LpStatus::optimal || lp.objective <= Rational(0)) return {};
        res.status = FeasibilityResult::Status::feasible;
        res.witness = Vec(lp.solution.begin(), lp.solution.end() - 1);
        res.slack = lp.objective;
    }

    // The witness is re-verified against the original, strict system.
    if (!sys.satisfied_by(*res.witness))
        throw std::logic_error("lp_feasible witness fails the original system");
    return res;
}

inline FeasibilityResult lp_feasible(const Polyhedron& p) { return lp_feasible(p.sys); }

}  // namespace nnex
