#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nnex/cells.hpp"
#include "nnex/classify.hpp"
#include "nnex/parallel.hpp"
#include "nnex/qp.hpp"
#include "nnex/simplex.hpp"
#include "nnex/sufficient.hpp"

namespace nnex {

struct CounterfactualResult {
    enum class Status { exists, not_exists, indeterminate };

    Status status = Status::not_exists;
    std::optional<Vec> witness;                // exact coordinates
    std::optional<Rational> achieved_powered;  // hamming count, l1 sum, or squared l2
    std::string provenance;
    std::vector<size_t> flip_set;  // hamming only

    bool exists() const { return status == Status::exists; }

    double achieved(const MetricSpec& m) const {
        if (!achieved_powered) return std::numeric_limits<double>::infinity();
        double p = to_double(*achieved_powered);
        return (m.is_hamming() || m.p == 1) ? p : std::pow(p, 1.0 / m.p);
    }
};

struct SolverStats {
    size_t cells_explored = 0;
    size_t qp_sweeps = 0;
    size_t sat_decisions = 0;
    size_t nodes_expanded = 0;
};

namespace detail {

// Every witness leaves through this gate: the flip and the budget are
// re-established independently of the search that found it.
inline void validate_witness(const LabeledDataset& ds, const MetricSpec& m, int k, const Vec& x,
                             const Vec& w, const Rational& budget_powered, bool exact_budget) {
    if (classify_optimistic(ds, m, k, w) == classify_optimistic(ds, m, k, x))
        throw std::logic_error("counterfactual witness does not flip the classification");
    Rational d = distance_powered(x, w, m);
    if (exact_budget) {
        if (d > budget_powered) throw std::logic_error("counterfactual witness exceeds the budget");
    } else {
        // float-born witnesses get the documented 1e-6 relative margin
        if (to_double(d) > to_double(budget_powered) * (1.0 + 3e-6))
            throw std::logic_error("counterfactual witness exceeds the budget");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// l2: per-cell projection.
// ---------------------------------------------------------------------------

struct CfL2Options {
    int threads = 1;
    QpOptions qp;
};

/// Counterfactual existence and witness under l2. Each opposite-label
/// cell is projected onto in floating point and the outcome is then
/// certified exactly: the active set from the QP is re-solved in
/// rational arithmetic, closed cells accept a witness at squared
/// distance <= l^2, open cells demand strictly less and recover an
/// interior witness by stepping along an exact interior direction with
/// step halving. Cells whose certificates cannot be pinned down either
/// way are reported indeterminate rather than coerced.
inline CounterfactualResult cf_l2(const LabeledDataset& ds, int k, const Vec& x,
                                  const Rational& budget, SolverStats* stats = nullptr,
                                  const CfL2Options& opt = {}) {
    ds.check_dim(x);
    if (budget < Rational(0)) throw std::invalid_argument("budget must be nonnegative");
    const MetricSpec m = MetricSpec::l2();
    const Label fx = classify_optimistic(ds, m, k, x);
    const Label target = opposite(fx);
    const Rational budget2 = budget * budget;

    struct CellOutcome {
        bool definite = false;
        bool indeterminate = false;
        std::optional<Vec> witness;
        Rational dist2;
        size_t ordinal = 0;
        std::string note;
    };

    std::vector<Cell> all_cells = cells(ds, k, target).all();
    std::vector<CellOutcome> outcomes(all_cells.size());
    std::atomic<size_t> sweeps{0};

    auto handle_cell = [&](size_t ci) {
        const Cell& cell = all_cells[ci];
        CellOutcome& out = outcomes[ci];
        out.ordinal = cell.ordinal;

        FeasibilityResult nonempty = lp_feasible(cell.poly.sys);
        if (!nonempty.feasible()) return;  // empty cell

        Polyhedron closure = cell.poly.closure();
        ProjectionResult proj;
        try {
            proj = qp_project(x, closure, opt.qp);
        } catch (const QpIterationLimit& e) {
            throw std::runtime_error("cf_l2: projection failed on cell " +
                                     std::to_string(cell.ordinal) + ": " + e.what());
        }
        sweeps.fetch_add(proj.sweeps);

        // Exact certificate: re-solve the projection on the QP's active
        // set in rational arithmetic and verify membership.
        std::optional<Vec> exact_point;
        auto attempt = equality_projection_exact(x, closure.constraints(), proj.active_set);
        if (attempt && closure.contains(*attempt)) {
            exact_point = std::move(*attempt);
        } else {
            Vec snapped(x.size());
            for (size_t j = 0; j < x.size(); ++j)
                snapped[j] = rational_from_double(proj.minimizer[j]);
            if (closure.contains(snapped)) exact_point = std::move(snapped);
        }

        if (!exact_point) {
            // No exact certificate; fall back to the documented float
            // bands. Inside the acceptance margin counts as borderline.
            double dist = std::sqrt(proj.squared_distance);
            double lim = to_double(budget);
            if (dist <= lim * (1.0 + 1e-6)) out.indeterminate = true;
            out.note = "cell " + std::to_string(cell.ordinal) + ": no exact certificate";
            return;
        }

        Rational d2(0);
        for (size_t j = 0; j < x.size(); ++j)
            d2 += ((*exact_point)[j] - x[j]) * ((*exact_point)[j] - x[j]);

        if (!cell.poly.is_open()) {
            if (d2 <= budget2) {
                out.definite = true;
                out.witness = std::move(*exact_point);
                out.dist2 = d2;
            }
            return;
        }

        // Open cell: the closure projection must land strictly inside
        // the budget ball, then an interior step recovers a point of
        // the open cell itself.
        if (d2 >= budget2) return;
        Vec beta;
        try {
            beta = interior_direction_exact(closure, *exact_point, opt.qp.activity_tol);
        } catch (const NoInteriorDirection&) {
            out.indeterminate = true;
            out.note = "cell " + std::to_string(cell.ordinal) + ": no interior direction";
            return;
        }
        double beta_norm = 0.0;
        for (const auto& b : beta) beta_norm += to_double(b) * to_double(b);
        beta_norm = std::sqrt(beta_norm) + 1e-30;
        // The step must keep the budget and should barely move the
        // distance; 1e-4 of slack is far inside every tolerance used
        // downstream.
        double room = to_double(budget) - std::sqrt(to_double(d2));
        double step0 = std::min(room / (2.0 * beta_norm), 1e-4 / beta_norm);
        Rational step = rational_from_double(std::max(step0, 1e-12));
        for (int halving = 0; halving < 80; ++halving, step /= Rational(2)) {
            Vec cand = *exact_point;
            for (size_t j = 0; j < cand.size(); ++j) cand[j] += step * beta[j];
            bool strict_ok = true;
            for (const auto& r : cell.poly.constraints())
                strict_ok = strict_ok && r.satisfied_by(cand);
            if (!strict_ok) continue;
            Rational cd2(0);
            for (size_t j = 0; j < cand.size(); ++j) cd2 += (cand[j] - x[j]) * (cand[j] - x[j]);
            if (cd2 > budget2) continue;
            out.definite = true;
            out.witness = std::move(cand);
            out.dist2 = cd2;
            return;
        }
        out.indeterminate = true;
        out.note = "cell " + std::to_string(cell.ordinal) + ": interior step underflow";
    };

    parallel_for(all_cells.size(), opt.threads, handle_cell);

    if (stats) {
        stats->cells_explored += all_cells.size();
        stats->qp_sweeps += sweeps.load();
    }

    CounterfactualResult res;
    const CellOutcome* best = nullptr;
    bool saw_indeterminate = false;
    for (const auto& out : outcomes) {
        saw_indeterminate = saw_indeterminate || out.indeterminate;
        if (out.definite && (!best || out.dist2 < best->dist2)) best = &out;
    }
    if (best) {
        res.status = CounterfactualResult::Status::exists;
        res.witness = best->witness;
        res.achieved_powered = best->dist2;
        res.provenance = "cell " + std::to_string(best->ordinal);
        detail::validate_witness(ds, m, k, x, *res.witness, budget2, /*exact_budget=*/true);
    } else if (saw_indeterminate) {
        res.status = CounterfactualResult::Status::indeterminate;
        res.provenance = "borderline cells without exact certificates";
    }
    return res;
}

// ---------------------------------------------------------------------------
// Hamming: exact iterative-deepening flip search.
// ---------------------------------------------------------------------------

struct CfHammingOptions {
    size_t node_cap = 10000000;  // classified candidates before giving up
    int threads = 1;
    size_t batch = 4096;
};

/// Exact discrete counterfactual: flip sets are enumerated by size then
/// lexicographically, so the first hit is distance-minimal.
inline CounterfactualResult cf_hamming_exact(const LabeledDataset& ds, int k, const Vec& x,
                                             const Rational& budget, SolverStats* stats = nullptr,
                                             const CfHammingOptions& opt = {}) {
    ds.check_dim(x);
    if (!ds.is_boolean() || !is_boolean_vector(x))
        throw std::invalid_argument("cf_hamming_exact needs boolean data");
    const MetricSpec m = MetricSpec::hamming();
    const size_t n = ds.dimension();
    const Label fx = classify_optimistic(ds, m, k, x);

    long long lim = 0;  // floor(budget), capped at n
    {
        Rational b = budget;
        while (Rational(lim + 1) <= b && lim < (long long)n) ++lim;
    }

    size_t nodes = 0;
    for (long long d = 1; d <= lim; ++d) {
        auto idx = detail::first_subset(static_cast<size_t>(d));
        bool more = true;
        while (more) {
            // One lexicographic batch, classified in parallel.
            std::vector<std::vector<size_t>> batch;
            while (more && batch.size() < opt.batch) {
                batch.push_back(idx);
                more = detail::next_subset(idx, n);
            }
            if (nodes + batch.size() > opt.node_cap)
                throw ResourceLimit("cf_hamming_exact: node cap " + std::to_string(opt.node_cap) +
                                    " hit at depth " + std::to_string(d) + " after " +
                                    std::to_string(nodes) + " candidates");
            nodes += batch.size();
            std::vector<char> hits(batch.size(), 0);
            parallel_for(batch.size(), opt.threads, [&](size_t bi) {
                Vec y = x;
                for (size_t i : batch[bi]) y[i] = Rational(1) - y[i];
                hits[bi] = classify_optimistic(ds, m, k, y) != fx;
            });
            for (size_t bi = 0; bi < batch.size(); ++bi) {
                if (!hits[bi]) continue;
                if (stats) stats->nodes_expanded += nodes;
                CounterfactualResult res;
                res.status = CounterfactualResult::Status::exists;
                Vec y = x;
                for (size_t i : batch[bi]) y[i] = Rational(1) - y[i];
                res.witness = y;
                res.achieved_powered = Rational(d);
                res.flip_set = batch[bi];
                std::ostringstream prov;
                prov << "flips {";
                for (size_t j = 0; j < batch[bi].size(); ++j)
                    prov << (j ? "," : "") << (batch[bi][j] + 1);
                prov << "}";
                res.provenance = prov.str();
                detail::validate_witness(ds, m, k, x, *res.witness, budget, true);
                return res;
            }
        }
    }
    if (stats) stats->nodes_expanded += nodes;
    return {};
}

// ---------------------------------------------------------------------------
// l1: exact search over sign-pattern regions.
// ---------------------------------------------------------------------------

struct CfL1Options {
    double region_budget = 1e7;  // product of per-coordinate region counts
    size_t leaf_lp_cap = 200000;
    bool decision_only = false;  // stop at the first in-budget witness
    Rational report_gap = Rational(1, 1000);  // distance tightening for open targets
};

namespace detail {

// Contribution of coordinate i to D_a - D_c over the closed region
// [lo, hi]; the function is monotone there, so ends suffice.
inline std::pair<Rational, Rational> row_contrib_range(const Rational& lo, const Rational& hi,
                                                       const Rational& ai, const Rational& ci) {
    auto at = [&](const Rational& y) { return abs_rat(y - ai) - abs_rat(y - ci); };
    Rational vlo = at(lo), vhi = at(hi);
    return {std::min(vlo, vhi), std::max(vlo, vhi)};
}

}  // namespace detail

/// Exact l1 counterfactual at desk scale. The box spanned by the
/// breakpoint values {x[i]} and {v[i] : v in the data} is covered by
/// closed inter-breakpoint regions per coordinate; within one region
/// choice every distance is affine, so each certificate pair (A, B) of
/// the target label reduces to exact LPs. Open-label targets keep their
/// strict rows and go through the epsilon trick. An optimal witness can
/// sit strictly between breakpoints and is found by the LP; nothing is
/// assumed about the grid itself.
inline CounterfactualResult cf_l1_oracle(const LabeledDataset& ds, int k, const Vec& x,
                                         const Rational& budget, SolverStats* stats = nullptr,
                                         const CfL1Options& opt = {}) {
    using detail::abs_rat;
    ds.check_dim(x);
    const MetricSpec m = MetricSpec::l1();
    const Label fx = classify_optimistic(ds, m, k, x);
    const Label target = opposite(fx);
    const size_t n = ds.dimension();
    const bool strict_target = (target == Label::negative);

    // Per-coordinate breakpoints; witnesses may be clamped to the box
    // they span without loss (moving an outside coordinate toward the
    // box shrinks every distance equally and the budget strictly).
    std::vector<std::vector<Rational>> bp(n);
    for (size_t i = 0; i < n; ++i) {
        bp[i].push_back(x[i]);
        for (const auto& v : ds.positives()) bp[i].push_back(v[i]);
        for (const auto& v : ds.negatives()) bp[i].push_back(v[i]);
        std::sort(bp[i].begin(), bp[i].end());
        bp[i].erase(std::unique(bp[i].begin(), bp[i].end()), bp[i].end());
    }
    double region_product = 1;
    std::vector<size_t> regions(n);
    for (size_t i = 0; i < n; ++i) {
        regions[i] = std::max<size_t>(1, bp[i].size() - 1);
        region_product *= double(regions[i]);
        if (region_product > opt.region_budget)
            throw ResourceLimit("cf_l1_oracle: region grid exceeds the budget");
    }

    const std::vector<Vec>& own = ds.points(target);
    const std::vector<Vec>& opp = ds.points(opposite(target));

    size_t leaf_lps = 0;
    std::optional<Vec> best_witness;  // in-budget witness, exact
    std::optional<Rational> best_wd;  // its distance
    std::string best_prov;

    // Region choice per coordinate, as [lo, hi] bounds.
    std::vector<Rational> lo(n), hi(n);

    auto leaf_system = [&](const std::vector<const Vec*>& rows_a,
                           const std::vector<const Vec*>& rows_c, bool relax_strict,
                           std::optional<Rational> budget_cap) {
        LinearSystem sys;
        sys.dimension = n;
        for (size_t i = 0; i < n; ++i) {
            LinearInequality l, h;
            l.coeffs.assign(n, Rational(0));
            l.coeffs[i] = Rational(1);
            l.rhs = lo[i];
            h.coeffs.assign(n, Rational(0));
            h.coeffs[i] = Rational(-1);
            h.rhs = -hi[i];
            sys.add(std::move(l));
            sys.add(std::move(h));
        }
        auto sign_in_region = [&](size_t i, const Rational& v) {
            // v is a breakpoint, so it cannot lie strictly inside.
            if (lo[i] >= v) return Rational(1);
            return Rational(-1);
        };
        for (size_t r = 0; r < rows_a.size(); ++r) {
            const Vec& a = *rows_a[r];
            const Vec& c = *rows_c[r];
            LinearInequality row;  // sum (s_c - s_a) y >= sum s_c c - sum s_a a
            row.coeffs.assign(n, Rational(0));
            Rational rhs(0);
            for (size_t i = 0; i < n; ++i) {
                Rational sa = sign_in_region(i, a[i]);
                Rational sc = sign_in_region(i, c[i]);
                row.coeffs[i] = sc - sa;
                rhs += sc * c[i] - sa * a[i];
            }
            row.rhs = rhs;
            row.sense = (strict_target && !relax_strict) ? Sense::gt : Sense::ge;
            sys.add(std::move(row));
        }
        if (budget_cap) {
            LinearInequality b;  // -sum sg_i y_i >= -cap - sum sg_i x_i
            b.coeffs.assign(n, Rational(0));
            Rational shift(0);
            for (size_t i = 0; i < n; ++i) {
                Rational sg = (lo[i] >= x[i]) ? Rational(1) : Rational(-1);
                if (lo[i] == hi[i] && lo[i] == x[i]) sg = Rational(0);
                b.coeffs[i] = -sg;
                shift += sg * x[i];
            }
            b.rhs = -*budget_cap - shift;
            sys.add(std::move(b));
        }
        return sys;
    };

    auto budget_objective = [&]() {  // maximize -(distance expression)
        Vec obj(n, Rational(0));
        for (size_t i = 0; i < n; ++i) {
            Rational sg = (lo[i] >= x[i]) ? Rational(1) : Rational(-1);
            if (lo[i] == hi[i] && lo[i] == x[i]) sg = Rational(0);
            obj[i] = -sg;
        }
        return obj;
    };
    auto budget_shift = [&]() {
        Rational s(0);
        for (size_t i = 0; i < n; ++i) {
            Rational sg = (lo[i] >= x[i]) ? Rational(1) : Rational(-1);
            if (lo[i] == hi[i] && lo[i] == x[i]) sg = Rational(0);
            s -= sg * x[i];
        }
        return s;
    };

    // Enumerate (A, B) certificate pairs exactly like the l2 cells.
    size_t a_size = size_t((k + 1) / 2), b_max = size_t((k - 1) / 2);
    if (own.size() < a_size) return {};
    auto a_idx = detail::first_subset(a_size);
    bool done_pairs = false;
    size_t pair_ordinal = 0;
    while (!done_pairs) {
        if (opt.decision_only && best_witness) break;
        for (size_t b_size = 0; b_size <= std::min(b_max, opp.size()); ++b_size) {
            if (opt.decision_only && best_witness) break;
            auto b_idx = detail::first_subset(b_size);
            bool more_b = true;
            while (more_b) {
                ++pair_ordinal;
                std::vector<const Vec*> rows_a, rows_c;
                bool pair_hopeless = false;
                for (size_t ai : a_idx) {
                    for (size_t cj = 0; cj < opp.size(); ++cj) {
                        if (std::find(b_idx.begin(), b_idx.end(), cj) != b_idx.end()) continue;
                        rows_a.push_back(&own[ai]);
                        rows_c.push_back(&opp[cj]);
                        // Moving from x by at most `budget` changes each
                        // class distance by at most `budget`; a row whose
                        // gap at x exceeds twice that can never close.
                        Rational gap = distance_powered(x, own[ai], m) -
                                       distance_powered(x, opp[cj], m);
                        if (gap > Rational(2) * budget) pair_hopeless = true;
                    }
                }
                if (pair_hopeless) {
                    more_b = b_size > 0 && detail::next_subset(b_idx, opp.size());
                    continue;
                }
                // Row pruning data: free-coordinate minima, suffix-summed.
                std::vector<std::vector<Rational>> suffix(rows_a.size());
                for (size_t r = 0; r < rows_a.size(); ++r) {
                    suffix[r].assign(n + 1, Rational(0));
                    for (size_t i = n; i-- > 0;)
                        suffix[r][i] =
                            suffix[r][i + 1] - abs_rat((*rows_a[r])[i] - (*rows_c[r])[i]);
                }

                std::vector<Rational> row_acc(rows_a.size(), Rational(0));
                Rational cost_acc(0);

                std::function<void(size_t)> dfs = [&](size_t depth) {
                    if (opt.decision_only && best_witness) return;
                    if (depth == n) {
                        if (leaf_lps++ > opt.leaf_lp_cap)
                            throw ResourceLimit("cf_l1_oracle: leaf LP cap exceeded");
                        if (stats) stats->nodes_expanded++;
                        // Closure minimum of the distance in this leaf.
                        LinearSystem closure = leaf_system(rows_a, rows_c, true, std::nullopt);
                        LpResult min_lp = lp_maximize(closure, budget_objective());
                        if (min_lp.status != LpStatus::optimal) return;
                        Rational dist = budget_shift() - min_lp.objective;
                        if (dist > budget) return;
                        if (!strict_target) {
                            if (!best_wd || dist < *best_wd) {
                                best_wd = dist;
                                best_witness = min_lp.solution;
                                best_prov = "pair " + std::to_string(pair_ordinal);
                            }
                            return;
                        }
                        // Open target: need a strictly labeled point in
                        // budget; skip if the incumbent is already better.
                        if (best_wd && *best_wd <= dist) return;
                        LinearSystem strict = leaf_system(rows_a, rows_c, false, budget);
                        FeasibilityResult fr = lp_feasible(strict);
                        if (!fr.feasible()) return;
                        Vec w = *fr.witness;
                        Rational wd = distance_powered(x, w, MetricSpec::l1());
                        // Tighten toward the closure infimum.
                        Rational lo_d = dist, hi_d = wd;
                        while (hi_d - lo_d > opt.report_gap) {
                            Rational mid = (lo_d + hi_d) / Rational(2);
                            FeasibilityResult f2 =
                                lp_feasible(leaf_system(rows_a, rows_c, false, mid));
                            if (f2.feasible()) {
                                w = *f2.witness;
                                hi_d = distance_powered(x, w, MetricSpec::l1());
                            } else {
                                lo_d = mid;
                            }
                        }
                        if (!best_wd || hi_d < *best_wd) {
                            best_wd = hi_d;
                            best_witness = std::move(w);
                            best_prov = "pair " + std::to_string(pair_ordinal);
                        }
                        return;
                    }
                    const auto& points = bp[depth];
                    for (size_t r = 0; r < regions[depth]; ++r) {
                        lo[depth] = points[r];
                        hi[depth] = points[std::min(r + 1, points.size() - 1)];
                        // budget prune
                        Rational step_cost(0);
                        if (lo[depth] > x[depth])
                            step_cost = lo[depth] - x[depth];
                        else if (hi[depth] < x[depth])
                            step_cost = x[depth] - hi[depth];
                        Rational cap = budget;
                        if (!opt.decision_only && best_wd && *best_wd < cap) cap = *best_wd;
                        if (cost_acc + step_cost > cap) continue;
                        // row infeasibility prune
                        bool impossible = false;
                        for (size_t rr = 0; rr < rows_a.size() && !impossible; ++rr) {
                            auto rng = detail::row_contrib_range(lo[depth], hi[depth],
                                                                 (*rows_a[rr])[depth],
                                                                 (*rows_c[rr])[depth]);
                            if (row_acc[rr] + rng.first + suffix[rr][depth + 1] > Rational(0))
                                impossible = true;
                        }
                        if (impossible) continue;
                        Rational saved_cost = cost_acc;
                        std::vector<Rational> saved_rows = row_acc;
                        cost_acc += step_cost;
                        for (size_t rr = 0; rr < rows_a.size(); ++rr)
                            row_acc[rr] += detail::row_contrib_range(lo[depth], hi[depth],
                                                                     (*rows_a[rr])[depth],
                                                                     (*rows_c[rr])[depth])
                                               .first;
                        dfs(depth + 1);
                        cost_acc = saved_cost;
                        row_acc = std::move(saved_rows);
                    }
                };
                dfs(0);
                more_b = b_size > 0 && detail::next_subset(b_idx, opp.size());
            }
        }
        done_pairs = !detail::next_subset(a_idx, own.size());
    }

    CounterfactualResult res;
    if (best_witness) {
        res.status = CounterfactualResult::Status::exists;
        res.witness = best_witness;
        res.achieved_powered = best_wd;
        res.provenance = best_prov;
        detail::validate_witness(ds, m, k, x, *res.witness, budget, /*exact_budget=*/true);
    }
    return res;
}

}  // namespace nnex
