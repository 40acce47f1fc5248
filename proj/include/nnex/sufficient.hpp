#pragma once

#include <algorithm>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nnex/cells.hpp"
#include "nnex/classify.hpp"
#include "nnex/parallel.hpp"
#include "nnex/simplex.hpp"

namespace nnex {

/// Raised for (metric, k) combinations with no known algorithm, e.g.
/// checking sufficiency under l1 with k >= 3.
struct UnsupportedSetting : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sorted set of 0-based feature indices. The CLI surface speaks
/// 1-based.
struct FeatureSet {
    std::vector<size_t> indices;

    FeatureSet() = default;
    FeatureSet(std::initializer_list<size_t> xs) : indices(xs) { normalize(); }
    explicit FeatureSet(std::vector<size_t> xs) : indices(std::move(xs)) { normalize(); }

    static FeatureSet full(size_t n) {
        FeatureSet f;
        f.indices.resize(n);
        for (size_t i = 0; i < n; ++i) f.indices[i] = i;
        return f;
    }

    void normalize() {
        std::sort(indices.begin(), indices.end());
        indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    }

    bool contains(size_t i) const {
        return std::binary_search(indices.begin(), indices.end(), i);
    }
    size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }

    FeatureSet without(size_t i) const {
        FeatureSet f;
        for (size_t j : indices)
            if (j != i) f.indices.push_back(j);
        return f;
    }

    FeatureSet with(size_t i) const {
        FeatureSet f = *this;
        f.indices.push_back(i);
        f.normalize();
        return f;
    }

    void check_bounds(size_t n) const {
        for (size_t i : indices)
            if (i >= n) throw std::invalid_argument("feature index out of range");
    }

    bool operator==(const FeatureSet&) const = default;
};

struct SufficiencyVerdict {
    bool sufficient = false;
    std::optional<Vec> counterexample;  // agrees with x on X, classified differently
};

namespace detail {

// Counterexamples are re-classified before they leave a checker; a
// mismatch means the checker itself is broken.
inline SufficiencyVerdict verified_counterexample(const LabeledDataset& ds, const MetricSpec& m,
                                                  int k, const Vec& x, const FeatureSet& X,
                                                  Vec z) {
    for (size_t i : X.indices)
        if (z[i] != x[i]) throw std::logic_error("counterexample does not agree with x on X");
    if (classify_optimistic(ds, m, k, z) == classify_optimistic(ds, m, k, x))
        throw std::logic_error("counterexample fails to flip the classification");
    return {false, std::move(z)};
}

}  // namespace detail

/// Sufficiency check under l2 for any odd k: substitute the pinned
/// coordinates into every opposite-label cell and test feasibility of
/// the reduced system over the free coordinates. X is sufficient iff
/// every such cell misses the affine subspace U(X, x).
inline SufficiencyVerdict check_sr_l2(const LabeledDataset& ds, int k, const Vec& x,
                                      const FeatureSet& X) {
    ds.check_dim(x);
    X.check_bounds(ds.dimension());
    const MetricSpec m = MetricSpec::l2();
    Label fx = classify_optimistic(ds, m, k, x);

    std::vector<size_t> free_idx;
    for (size_t i = 0; i < ds.dimension(); ++i)
        if (!X.contains(i)) free_idx.push_back(i);

    CellEnumeration en = cells(ds, k, opposite(fx));
    while (auto cell = en.next()) {
        LinearSystem reduced;
        reduced.dimension = free_idx.size();
        for (const auto& row : cell->poly.constraints()) {
            LinearInequality r;
            r.sense = row.sense;
            r.rhs = row.rhs;
            for (size_t i : X.indices) r.rhs -= row.coeffs[i] * x[i];
            for (size_t i : free_idx) r.coeffs.push_back(row.coeffs[i]);
            reduced.rows.push_back(std::move(r));
        }
        FeasibilityResult fr = lp_feasible(reduced);
        if (fr.feasible()) {
            Vec z = x;
            for (size_t j = 0; j < free_idx.size(); ++j) z[free_idx[j]] = (*fr.witness)[j];
            return detail::verified_counterexample(ds, m, k, x, X, std::move(z));
        }
    }
    return {true, std::nullopt};
}

namespace detail {

// Shared body of the two k=1 hybrid-candidate checkers: for each point
// of the class opposite to f(x), complete x's off-X coordinates from
// that point and see whether the label flips.
inline SufficiencyVerdict check_sr_k1_hybrids(const LabeledDataset& ds, const MetricSpec& m,
                                              const Vec& x, const FeatureSet& X) {
    ds.check_dim(x);
    X.check_bounds(ds.dimension());
    Label fx = classify_optimistic(ds, m, 1, x);
    for (const auto& cand : ds.points(opposite(fx))) {
        Vec z = cand;
        for (size_t i : X.indices) z[i] = x[i];
        if (classify_optimistic(ds, m, 1, z) != fx)
            return verified_counterexample(ds, m, 1, x, X, std::move(z));
    }
    return {true, std::nullopt};
}

}  // namespace detail

/// k = 1 sufficiency under l1. The candidate completions (x on X, a
/// elsewhere) for a in the opposite class are exhaustive: the slack of
/// every comparison against the other class is maximized at the
/// candidate itself, by the triangle inequality.
inline SufficiencyVerdict check_sr_l1_k1(const LabeledDataset& ds, const Vec& x,
                                         const FeatureSet& X) {
    return detail::check_sr_k1_hybrids(ds, MetricSpec::l1(), x, X);
}

/// k = 1 sufficiency under Hamming; the flipping completion can always
/// be chosen among the opposite-class hybrids.
inline SufficiencyVerdict check_sr_hamming_k1(const LabeledDataset& ds, const Vec& x,
                                              const FeatureSet& X) {
    return detail::check_sr_k1_hybrids(ds, MetricSpec::hamming(), x, X);
}

/// Definitional oracle over the boolean domain: enumerate every
/// completion of the free coordinates. The only available check for
/// Hamming with k >= 3.
inline SufficiencyVerdict check_sr_bruteforce(const LabeledDataset& ds, const MetricSpec& m, int k,
                                              const Vec& x, const FeatureSet& X,
                                              size_t free_budget = 20) {
    ds.check_dim(x);
    X.check_bounds(ds.dimension());
    if (!ds.is_boolean() || !is_boolean_vector(x))
        throw std::invalid_argument("check_sr_bruteforce needs boolean data");
    std::vector<size_t> free_idx;
    for (size_t i = 0; i < ds.dimension(); ++i)
        if (!X.contains(i)) free_idx.push_back(i);
    if (free_idx.size() > free_budget)
        throw ResourceLimit("check_sr_bruteforce: " + std::to_string(free_idx.size()) +
                            " free coordinates exceed the budget of " +
                            std::to_string(free_budget));
    Label fx = classify_optimistic(ds, m, k, x);
    Vec z = x;
    for (size_t mask = 0; mask < (size_t(1) << free_idx.size()); ++mask) {
        for (size_t j = 0; j < free_idx.size(); ++j) z[free_idx[j]] = Rational((mask >> j) & 1);
        if (classify_optimistic(ds, m, k, z) != fx)
            return detail::verified_counterexample(ds, m, k, x, X, z);
    }
    return {true, std::nullopt};
}

using SufficiencyChecker = std::function<SufficiencyVerdict(const FeatureSet&)>;

/// Routes (metric, k) to the right checker, bound to (ds, x).
/// l1 with k >= 3 has no algorithm and is rejected.
inline SufficiencyChecker make_checker(const LabeledDataset& ds, const MetricSpec& m, int k,
                                       const Vec& x, size_t bruteforce_budget = 20) {
    require_odd_k(k);
    ds.require_compatible(m);
    if (m.is_hamming()) {
        if (k == 1)
            return [&ds, x](const FeatureSet& X) { return check_sr_hamming_k1(ds, x, X); };
        return [&ds, m, k, x, bruteforce_budget](const FeatureSet& X) {
            return check_sr_bruteforce(ds, m, k, x, X, bruteforce_budget);
        };
    }
    if (m.is_lp(2)) return [&ds, k, x](const FeatureSet& X) { return check_sr_l2(ds, k, x, X); };
    if (m.is_lp(1)) {
        if (k == 1) return [&ds, x](const FeatureSet& X) { return check_sr_l1_k1(ds, x, X); };
        throw UnsupportedSetting(
            "sufficiency checking under l1 with k >= 3 is an open problem");
    }
    throw UnsupportedSetting("no sufficiency checker for metric " + m.name());
}

/// Greedy minimal sufficient reason: start from all coordinates and try
/// to drop each one once, in the given order (default: descending
/// index). The result is verified sufficient and 1-minimal before it is
/// returned. Different orders give different, equally valid minimal
/// sets.
inline FeatureSet minimal_sr(size_t dimension, const SufficiencyChecker& check,
                             const std::vector<size_t>& drop_order = {}) {
    std::vector<size_t> order = drop_order;
    if (order.empty()) {
        order.resize(dimension);
        for (size_t i = 0; i < dimension; ++i) order[i] = dimension - 1 - i;
    }
    if (order.size() != dimension)
        throw std::invalid_argument("drop order must be a permutation of all coordinates");
    {
        auto sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (size_t i = 0; i < dimension; ++i)
            if (sorted[i] != i)
                throw std::invalid_argument("drop order must be a permutation of all coordinates");
    }

    FeatureSet X = FeatureSet::full(dimension);
    for (size_t i : order) {
        FeatureSet cand = X.without(i);
        if (check(cand).sufficient) X = std::move(cand);
    }
    if (!check(X).sufficient) throw std::logic_error("greedy result is not sufficient");
    for (size_t i : X.indices)
        if (check(X.without(i)).sufficient)
            throw std::logic_error("greedy result is not minimal");
    return X;
}

/// Exact minimum sufficient reason of size <= bound, by staged subset
/// enumeration: cardinalities in increasing order, lexicographic within
/// a cardinality, earliest hit wins. With the early exit, supersets of
/// a sufficient set are never reached as candidates. Stages can fan out
/// to workers; the lexicographically first success of the smallest
/// cardinality is returned either way.
inline std::optional<FeatureSet> minimum_sr_exact(size_t dimension, size_t bound,
                                                  const SufficiencyChecker& check,
                                                  const ExecOptions& exec = {},
                                                  size_t dimension_budget = 24) {
    if (dimension > dimension_budget)
        throw ResourceLimit("minimum_sr_exact: dimension " + std::to_string(dimension) +
                            " exceeds the enumeration budget " + std::to_string(dimension_budget));
    bound = std::min(bound, dimension);
    for (size_t card = 0; card <= bound; ++card) {
        // Materialize this stage (C(n, card) subsets, lexicographic).
        std::vector<std::vector<size_t>> stage;
        if (card == 0) {
            stage.push_back({});
        } else {
            auto idx = detail::first_subset(card);
            do {
                stage.push_back(idx);
            } while (detail::next_subset(idx, dimension));
        }
        std::vector<char> hit(stage.size(), 0);
        std::atomic<size_t> earliest{stage.size()};
        parallel_for(stage.size(), exec.threads, [&](size_t i) {
            if (i > earliest.load(std::memory_order_relaxed)) return;  // already beaten
            if (check(FeatureSet(stage[i])).sufficient) {
                hit[i] = 1;
                size_t cur = earliest.load();
                while (i < cur && !earliest.compare_exchange_weak(cur, i)) {
                }
            }
        });
        for (size_t i = 0; i < stage.size(); ++i)
            if (hit[i]) return FeatureSet(stage[i]);
    }
    return std::nullopt;
}

}  // namespace nnex
