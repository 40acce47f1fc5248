#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nnex/dataset.hpp"
#include "nnex/rational.hpp"

namespace nnex {

namespace detail {
inline Rational abs_rat(const Rational& r) { return r < Rational(0) ? -r : r; }

inline Rational pow_rat(const Rational& base, int e) {
    Rational acc(1);
    for (int i = 0; i < e; ++i) acc *= base;
    return acc;
}
}  // namespace detail

/// Exact order-preserving distance: the Hamming count, or the p-th power
/// of the lp-norm. Powers of the norm preserve the distance order while
/// keeping the arithmetic rational, so every comparison in the library
/// goes through this variant.
inline Rational distance_powered(const Vec& x, const Vec& y, const MetricSpec& m) {
    if (x.size() != y.size())
        throw std::invalid_argument("distance: dimension mismatch (" + std::to_string(x.size()) +
                                    " vs " + std::to_string(y.size()) + ")");
    if (m.is_hamming()) {
        if (!is_boolean_vector(x) || !is_boolean_vector(y))
            throw std::invalid_argument("hamming distance requires boolean vectors");
        int diff = 0;
        for (size_t i = 0; i < x.size(); ++i) diff += (x[i] != y[i]);
        return Rational(diff);
    }
    Rational acc(0);
    for (size_t i = 0; i < x.size(); ++i) acc += detail::pow_rat(detail::abs_rat(x[i] - y[i]), m.p);
    return acc;
}

/// True metric value as a double (p-th root of the powered form).
inline double distance(const Vec& x, const Vec& y, const MetricSpec& m) {
    double powered = to_double(distance_powered(x, y, m));
    if (m.is_hamming() || m.p == 1) return powered;
    return std::pow(powered, 1.0 / m.p);
}

/// Sorted distance/label profile of a query against the training set,
/// with the tie structure at the k-th smallest distance made explicit.
struct NeighborProfile {
    struct Entry {
        Rational dist;  // powered distance
        Label label;
    };
    std::vector<Entry> entries;  // nondecreasing by dist
    Rational threshold;          // k-th smallest distance d_k
    int positives_below = 0;     // positives with dist < d_k
    int positives_at = 0;        // positives with dist == d_k
    int free_slots = 0;          // k minus number of points with dist < d_k
};

inline NeighborProfile neighbor_profile(const LabeledDataset& ds, const MetricSpec& m, int k,
                                        const Vec& x) {
    require_odd_k(k);
    ds.require_compatible(m);
    ds.check_dim(x);
    if (ds.positives().empty() || ds.negatives().empty())
        throw std::invalid_argument("classification needs nonempty S+ and S-");
    if (ds.total_points() < static_cast<size_t>(k))
        throw std::invalid_argument("fewer than k training points");

    NeighborProfile prof;
    prof.entries.reserve(ds.total_points());
    for (const auto& v : ds.positives())
        prof.entries.push_back({distance_powered(x, v, m), Label::positive});
    for (const auto& v : ds.negatives())
        prof.entries.push_back({distance_powered(x, v, m), Label::negative});
    std::stable_sort(prof.entries.begin(), prof.entries.end(),
                     [](const auto& a, const auto& b) { return a.dist < b.dist; });

    prof.threshold = prof.entries[k - 1].dist;
    int below_all = 0;
    for (const auto& e : prof.entries) {
        if (e.dist < prof.threshold) {
            ++below_all;
            if (e.label == Label::positive) ++prof.positives_below;
        } else if (e.dist == prof.threshold && e.label == Label::positive) {
            ++prof.positives_at;
        }
    }
    prof.free_slots = k - below_all;
    return prof;
}

/// Optimistic k-NN classification: label 1 whenever some valid choice of
/// k closest points has a positive majority. Closed form over the
/// neighbor profile; ties at the threshold distance are filled with
/// positives first.
inline Label classify_optimistic(const LabeledDataset& ds, const MetricSpec& m, int k,
                                 const Vec& x) {
    NeighborProfile prof = neighbor_profile(ds, m, k, x);
    int positives = prof.positives_below + std::min(prof.positives_at, prof.free_slots);
    return positives >= (k + 1) / 2 ? Label::positive : Label::negative;
}

namespace detail {

// Enumerates fixed-size index subsets in lexicographic order.
inline bool next_subset(std::vector<size_t>& idx, size_t universe) {
    size_t r = idx.size();
    for (size_t i = r; i-- > 0;) {
        if (idx[i] + (r - i) < universe) {
            ++idx[i];
            for (size_t j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

inline std::vector<size_t> first_subset(size_t r) {
    std::vector<size_t> idx(r);
    for (size_t i = 0; i < r; ++i) idx[i] = i;
    return idx;
}

}  // namespace detail

/// Literal subset characterization of the optimistic rule: there is an
/// A within one class of size (k+1)/2 and a B within the other of size
/// at most (k-1)/2 such that every a in A is at least as close as every
/// point outside B of the other class (strictly closer when deciding
/// label 0). Exponential in k; test oracle only.
inline Label classify_by_subsets(const LabeledDataset& ds, const MetricSpec& m, int k,
                                 const Vec& x) {
    require_odd_k(k);
    ds.require_compatible(m);
    ds.check_dim(x);
    if (ds.total_points() < static_cast<size_t>(k))
        throw std::invalid_argument("fewer than k training points");

    std::vector<Rational> dpos, dneg;
    for (const auto& v : ds.positives()) dpos.push_back(distance_powered(x, v, m));
    for (const auto& v : ds.negatives()) dneg.push_back(distance_powered(x, v, m));

    // strict=false: the label-1 clause of the characterization.
    auto witness_exists = [&](const std::vector<Rational>& da, const std::vector<Rational>& dc,
                              bool strict) {
        size_t a_size = static_cast<size_t>((k + 1) / 2);
        size_t b_max = static_cast<size_t>((k - 1) / 2);
        if (da.size() < a_size) return false;
        auto a_idx = detail::first_subset(a_size);
        do {
            Rational worst_a = da[a_idx[0]];
            for (size_t i : a_idx) worst_a = std::max(worst_a, da[i]);
            for (size_t b_size = 0; b_size <= std::min(b_max, dc.size()); ++b_size) {
                auto b_idx = detail::first_subset(b_size);
                bool more = true;
                while (more) {
                    bool ok = true;
                    for (size_t j = 0; j < dc.size() && ok; ++j) {
                        if (std::find(b_idx.begin(), b_idx.end(), j) != b_idx.end()) continue;
                        ok = strict ? (worst_a < dc[j]) : (worst_a <= dc[j]);
                    }
                    if (ok) return true;
                    more = b_size > 0 && detail::next_subset(b_idx, dc.size());
                }
            }
        } while (detail::next_subset(a_idx, da.size()));
        return false;
    };

    if (witness_exists(dpos, dneg, /*strict=*/false)) return Label::positive;
    if (witness_exists(dneg, dpos, /*strict=*/true)) return Label::negative;
    // The two clauses are exhaustive for odd k.
    throw std::logic_error("subset characterization matched neither label");
}

}  // namespace nnex
