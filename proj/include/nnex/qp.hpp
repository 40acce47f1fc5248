#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nnex/linear.hpp"
#include "nnex/rational.hpp"
#include "nnex/simplex.hpp"

namespace nnex {

// ---------------------------------------------------------------------------
// Exact linear algebra helpers (rational Gauss-Jordan).
// ---------------------------------------------------------------------------

/// Any solution of M w = r, or nullopt when inconsistent. Free variables
/// are set to zero.
inline std::optional<Vec> solve_linear_system_rational(std::vector<Vec> M, Vec r) {
    const size_t m = M.size();
    if (m == 0) return Vec{};
    const size_t n = M[0].size();
    std::vector<size_t> pivot_col(m, n);
    size_t rank = 0;
    for (size_t col = 0; col < n && rank < m; ++col) {
        size_t sel = m;
        for (size_t i = rank; i < m; ++i) {
            if (M[i][col] != Rational(0)) {
                sel = i;
                break;
            }
        }
        if (sel == m) continue;
        std::swap(M[sel], M[rank]);
        std::swap(r[sel], r[rank]);
        Rational p = M[rank][col];
        for (auto& v : M[rank]) v /= p;
        r[rank] /= p;
        for (size_t i = 0; i < m; ++i) {
            if (i == rank) continue;
            Rational f = M[i][col];
            if (f == Rational(0)) continue;
            for (size_t j = 0; j < n; ++j) M[i][j] -= f * M[rank][j];
            r[i] -= f * r[rank];
        }
        pivot_col[rank] = col;
        ++rank;
    }
    for (size_t i = rank; i < m; ++i)
        if (r[i] != Rational(0)) return std::nullopt;
    Vec w(n, Rational(0));
    for (size_t i = 0; i < rank; ++i) w[pivot_col[i]] = r[i];
    return w;
}

/// Exact projection of x onto the affine subspace spanned by the given
/// rows taken as equalities: y = x + A^T mu with (A A^T) mu = b - A x.
/// nullopt when the equalities are mutually inconsistent.
inline std::optional<Vec> equality_projection_exact(const Vec& x,
                                                    const std::vector<LinearInequality>& rows,
                                                    const std::vector<size_t>& active) {
    if (active.empty()) return x;
    const size_t m = active.size();
    std::vector<Vec> gram(m, Vec(m, Rational(0)));
    Vec rhs(m, Rational(0));
    for (size_t i = 0; i < m; ++i) {
        const auto& ri = rows[active[i]];
        rhs[i] = ri.rhs - ri.eval(x);
        for (size_t j = 0; j < m; ++j) {
            const auto& rj = rows[active[j]];
            Rational dot(0);
            for (size_t t = 0; t < x.size(); ++t) dot += ri.coeffs[t] * rj.coeffs[t];
            gram[i][j] = dot;
        }
    }
    auto mu = solve_linear_system_rational(std::move(gram), std::move(rhs));
    if (!mu) return std::nullopt;
    Vec y = x;
    for (size_t i = 0; i < m; ++i) {
        const auto& ri = rows[active[i]];
        for (size_t t = 0; t < x.size(); ++t) y[t] += (*mu)[i] * ri.coeffs[t];
    }
    return y;
}

// ---------------------------------------------------------------------------
// Floating-point projection kernel.
// ---------------------------------------------------------------------------

struct QpOptions {
    double dual_tol = 1e-9;      // convergence threshold on the dual update
    size_t sweep_cap = 1000000;  // Hildreth sweeps before giving up
    double activity_tol = 1e-7;  // |a^T y - b| <= tol * (1 + |b|) marks a row active
};

struct ProjectionResult {
    std::vector<double> minimizer;
    double squared_distance = 0.0;
    std::vector<size_t> active_set;  // rows tight at the minimizer
    std::vector<double> multipliers;
    double kkt_residual = 0.0;
    size_t sweeps = 0;
};

struct QpIterationLimit : std::runtime_error {
    ProjectionResult best;
    explicit QpIterationLimit(ProjectionResult b)
        : std::runtime_error("qp_project: sweep cap exceeded (residual " +
                             std::to_string(b.kkt_residual) + ")"),
          best(std::move(b)) {}
};

namespace detail {

struct DenseRows {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    std::vector<double> norm2;
    size_t n = 0;
};

inline DenseRows to_dense(const Polyhedron& p) {
    DenseRows d;
    d.n = p.dimension();
    for (const auto& r : p.constraints()) {
        std::vector<double> row(d.n);
        double nrm = 0.0;
        for (size_t j = 0; j < d.n; ++j) {
            row[j] = to_double(r.coeffs[j]);
            nrm += row[j] * row[j];
        }
        if (nrm == 0.0) continue;  // constant rows: caller guarantees consistency
        d.a.push_back(std::move(row));
        d.b.push_back(to_double(r.rhs));
        d.norm2.push_back(nrm);
    }
    return d;
}

inline double kkt_residual(const DenseRows& d, const std::vector<double>& y,
                           const std::vector<double>& lambda) {
    double res = 0.0;
    for (size_t i = 0; i < d.a.size(); ++i) {
        double r = -d.b[i];
        for (size_t j = 0; j < d.n; ++j) r += d.a[i][j] * y[j];
        double scale = 1.0 + std::fabs(d.b[i]);
        res = std::max(res, -r / scale);                       // primal feasibility
        res = std::max(res, std::fabs(lambda[i] * r) / scale);  // complementarity
        if (lambda[i] < 0) res = std::max(res, -lambda[i]);
    }
    return res;
}

// Dense Gaussian elimination with partial pivoting; false if singular.
inline bool solve_dense(std::vector<std::vector<double>> m, std::vector<double>& rhs) {
    const size_t n = m.size();
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        for (size_t i = c + 1; i < n; ++i)
            if (std::fabs(m[i][c]) > std::fabs(m[piv][c])) piv = i;
        if (std::fabs(m[piv][c]) < 1e-12) return false;
        std::swap(m[piv], m[c]);
        std::swap(rhs[piv], rhs[c]);
        for (size_t i = 0; i < n; ++i) {
            if (i == c) continue;
            double f = m[i][c] / m[c][c];
            if (f == 0.0) continue;
            for (size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
            rhs[i] -= f * rhs[c];
        }
    }
    for (size_t c = 0; c < n; ++c) rhs[c] /= m[c][c];
    return true;
}

// Equality projection onto the working set; fills y and mu. False when
// the Gram system is singular.
inline bool project_on_working_set(const DenseRows& d, const std::vector<double>& x,
                                   const std::vector<size_t>& ws, std::vector<double>& y,
                                   std::vector<double>& mu) {
    const size_t m = ws.size();
    y = x;
    mu.assign(m, 0.0);
    if (m == 0) return true;
    std::vector<std::vector<double>> gram(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (size_t i = 0; i < m; ++i) {
        rhs[i] = d.b[ws[i]];
        for (size_t j = 0; j < d.n; ++j) rhs[i] -= d.a[ws[i]][j] * x[j];
        for (size_t j = 0; j < m; ++j) {
            double dot = 0.0;
            for (size_t t = 0; t < d.n; ++t) dot += d.a[ws[i]][t] * d.a[ws[j]][t];
            gram[i][j] = dot;
        }
    }
    if (!solve_dense(std::move(gram), rhs)) return false;
    mu = rhs;
    for (size_t i = 0; i < m; ++i)
        for (size_t t = 0; t < d.n; ++t) y[t] += mu[i] * d.a[ws[i]][t];
    return true;
}

}  // namespace detail

/// Projection of x onto a closed, feasible polyhedron: the unique
/// minimizer of ||x - y||_2^2. Hildreth dual coordinate ascent, then an
/// active-set refinement pass to tighten the KKT residual. The caller
/// certifies feasibility beforehand (lp_feasible); on an infeasible or
/// pathological instance the sweep cap fires and the best iterate is
/// attached to the error.
inline ProjectionResult qp_project(const Vec& x, const Polyhedron& P, const QpOptions& opt = {}) {
    if (P.is_open()) throw std::invalid_argument("qp_project needs a closed polyhedron");
    if (x.size() != P.dimension()) throw std::invalid_argument("qp_project: dimension mismatch");

    ProjectionResult out;
    // Membership is decided exactly; the projection of an inner point is
    // the point itself.
    if (P.contains(x)) {
        out.minimizer.resize(x.size());
        for (size_t i = 0; i < x.size(); ++i) out.minimizer[i] = to_double(x[i]);
        out.multipliers.assign(P.constraints().size(), 0.0);
        for (size_t i = 0; i < P.constraints().size(); ++i) {
            const auto& r = P.constraints()[i];
            if (r.eval(x) == r.rhs) out.active_set.push_back(i);
        }
        return out;
    }

    detail::DenseRows d = detail::to_dense(P);
    std::vector<double> x0(x.size());
    for (size_t i = 0; i < x.size(); ++i) x0[i] = to_double(x[i]);

    const size_t m = d.a.size();
    std::vector<double> lambda(m, 0.0), y = x0;
    size_t sweep = 0;
    for (; sweep < opt.sweep_cap; ++sweep) {
        double worst = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double r = -d.b[i];
            for (size_t j = 0; j < d.n; ++j) r += d.a[i][j] * y[j];
            double delta = std::max(-lambda[i], -r / d.norm2[i]);
            if (delta != 0.0) {
                lambda[i] += delta;
                for (size_t j = 0; j < d.n; ++j) y[j] += delta * d.a[i][j];
                worst = std::max(worst, std::fabs(delta) * std::sqrt(d.norm2[i]));
            }
        }
        if (worst <= opt.dual_tol) break;
    }

    auto finish = [&](std::vector<double> yy, std::vector<double> lam) {
        ProjectionResult r;
        r.minimizer = std::move(yy);
        r.multipliers = std::move(lam);
        r.sweeps = sweep;
        r.squared_distance = 0.0;
        for (size_t j = 0; j < d.n; ++j)
            r.squared_distance += (r.minimizer[j] - x0[j]) * (r.minimizer[j] - x0[j]);
        r.kkt_residual = detail::kkt_residual(d, r.minimizer, r.multipliers);
        for (size_t i = 0; i < m; ++i) {
            double resid = -d.b[i];
            for (size_t j = 0; j < d.n; ++j) resid += d.a[i][j] * r.minimizer[j];
            if (std::fabs(resid) <= opt.activity_tol * (1.0 + std::fabs(d.b[i])))
                r.active_set.push_back(i);
        }
        return r;
    };

    ProjectionResult hildreth = finish(y, lambda);
    if (sweep >= opt.sweep_cap && hildreth.kkt_residual > 1e-6)
        throw QpIterationLimit(std::move(hildreth));

    // Active-set refinement: re-solve on the numerically active rows,
    // swapping rows in/out until the KKT signs hold.
    std::vector<size_t> ws = hildreth.active_set;
    std::vector<double> ry, rmu;
    for (int pass = 0; pass < 50; ++pass) {
        if (!detail::project_on_working_set(d, x0, ws, ry, rmu)) break;
        // most negative multiplier leaves
        size_t drop = ws.size();
        double most_neg = -1e-10;
        for (size_t i = 0; i < ws.size(); ++i)
            if (rmu[i] < most_neg) {
                most_neg = rmu[i];
                drop = i;
            }
        if (drop != ws.size()) {
            ws.erase(ws.begin() + drop);
            continue;
        }
        // most violated row enters
        size_t add = m;
        double worst = -1e-10;
        for (size_t i = 0; i < m; ++i) {
            double r = -d.b[i];
            for (size_t j = 0; j < d.n; ++j) r += d.a[i][j] * ry[j];
            if (-r > worst && std::find(ws.begin(), ws.end(), i) == ws.end()) {
                worst = -r;
                add = i;
            }
        }
        if (add != m) {
            ws.push_back(add);
            continue;
        }
        std::vector<double> lam(m, 0.0);
        for (size_t i = 0; i < ws.size(); ++i) lam[ws[i]] = rmu[i];
        ProjectionResult refined = finish(ry, lam);
        if (refined.kkt_residual <= hildreth.kkt_residual) return refined;
        break;
    }
    return hildreth;
}

// ---------------------------------------------------------------------------
// Interior directions (for recovering witnesses in open cells).
// ---------------------------------------------------------------------------

struct NoInteriorDirection : std::runtime_error {
    NoInteriorDirection()
        : std::runtime_error("no direction strictly improves every active constraint") {}
};

/// Exact direction beta with a^T beta > 0 for every row active at y,
/// found by the epsilon-trick LP inside the unit box. Unnormalized.
inline Vec interior_direction_exact(const Polyhedron& closure, const Vec& y,
                                    double activity_tol = 1e-7) {
    if (closure.is_open()) throw std::invalid_argument("interior_direction takes the closure");
    const size_t n = closure.dimension();
    std::vector<size_t> active;
    for (size_t i = 0; i < closure.constraints().size(); ++i) {
        const auto& r = closure.constraints()[i];
        double resid = to_double(r.eval(y) - r.rhs);
        if (std::fabs(resid) <= activity_tol * (1.0 + std::fabs(to_double(r.rhs))))
            active.push_back(i);
    }
    if (active.empty()) {
        Vec e1(n, Rational(0));
        if (n > 0) e1[0] = Rational(1);
        return e1;
    }
    LinearSystem sys;
    sys.dimension = n;
    for (size_t i : active) {
        LinearInequality row;
        row.coeffs = closure.constraints()[i].coeffs;
        row.rhs = Rational(0);
        row.sense = Sense::gt;
        sys.rows.push_back(std::move(row));
    }
    for (size_t j = 0; j < n; ++j) {  // -1 <= beta_j <= 1 keeps the LP bounded
        LinearInequality lo, hi;
        lo.coeffs.assign(n, Rational(0));
        lo.coeffs[j] = Rational(1);
        lo.rhs = Rational(-1);
        lo.sense = Sense::ge;
        hi.coeffs.assign(n, Rational(0));
        hi.coeffs[j] = Rational(-1);
        hi.rhs = Rational(-1);
        hi.sense = Sense::ge;
        sys.rows.push_back(std::move(lo));
        sys.rows.push_back(std::move(hi));
    }
    FeasibilityResult fr = lp_feasible(sys);
    if (!fr.feasible()) throw NoInteriorDirection();
    return *fr.witness;
}

/// Unit-norm floating point variant of interior_direction_exact.
inline std::vector<double> interior_direction(const Polyhedron& closure, const Vec& y,
                                              double activity_tol = 1e-7) {
    Vec beta = interior_direction_exact(closure, y, activity_tol);
    std::vector<double> out(beta.size());
    double nrm = 0.0;
    for (size_t i = 0; i < beta.size(); ++i) {
        out[i] = to_double(beta[i]);
        nrm += out[i] * out[i];
    }
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) throw NoInteriorDirection();
    for (auto& v : out) v /= nrm;
    return out;
}

}  // namespace nnex
