#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "nnex/classify.hpp"
#include "nnex/dataset.hpp"
#include "nnex/linear.hpp"

namespace nnex {

struct DegenerateBisector : std::runtime_error {
    DegenerateBisector() : std::runtime_error("bisector of identical points is degenerate") {}
};

/// Halfspace of points at least as close (resp. strictly closer) to a
/// than to c under l2: (a-c)^T y >= (or >) (a-c)^T (a+c) / 2.
inline LinearInequality bisector(const Vec& a, const Vec& c, Sense sense) {
    if (a.size() != c.size()) throw std::invalid_argument("bisector: dimension mismatch");
    if (sense == Sense::eq) throw std::invalid_argument("bisector sense must be >= or >");
    if (a == c) throw DegenerateBisector();
    LinearInequality ineq;
    ineq.sense = sense;
    ineq.coeffs.resize(a.size());
    Rational rhs(0);
    for (size_t i = 0; i < a.size(); ++i) {
        ineq.coeffs[i] = a[i] - c[i];
        rhs += (a[i] - c[i]) * (a[i] + c[i]);
    }
    ineq.rhs = rhs / Rational(2);
    return ineq;
}

/// One decision-region cell: the polyhedron of query points for which
/// the subset pair (A, B) certifies the target label. A indexes the
/// target class, B the opposite class.
struct Cell {
    Polyhedron poly;
    std::vector<size_t> a_indices;
    std::vector<size_t> b_indices;
    size_t ordinal = 0;  // position in the enumeration
};

/// Lazy enumeration of the decision-region cells of a target label
/// under l2. Label 1 uses non-strict bisectors (closed cells), label 0
/// strict ones (open cells). Order is deterministic: A subsets in
/// lexicographic order; within each A, B subsets by size then
/// lexicographic. Cells containing an infeasible degenerate constraint
/// (duplicate point across classes under a strict sense) are skipped;
/// vacuous degenerate constraints are dropped.
///
/// Holds references to the dataset; keep it alive while enumerating.
class CellEnumeration {
public:
    CellEnumeration(const LabeledDataset& ds, int k, Label target)
        : ds_(ds), target_(target), k_(k) {
        require_odd_k(k);
        if (ds.total_points() < static_cast<size_t>(k))
            throw std::invalid_argument("fewer than k training points");
        const auto& own = ds_.points(target_);
        a_size_ = static_cast<size_t>((k + 1) / 2);
        b_max_ = static_cast<size_t>((k - 1) / 2);
        if (own.size() < a_size_) {
            done_ = true;
            return;
        }
        a_idx_ = detail::first_subset(a_size_);
        b_size_ = 0;
        b_idx_.clear();
    }

    Label target() const { return target_; }

    std::optional<Cell> next() {
        while (!done_) {
            std::optional<Cell> cell = build_current();
            advance();
            if (cell) {
                cell->ordinal = ordinal_++;
                return cell;
            }
        }
        return std::nullopt;
    }

    /// Materializes the remaining cells (small datasets only).
    std::vector<Cell> all() {
        std::vector<Cell> cells;
        while (auto c = next()) cells.push_back(std::move(*c));
        return cells;
    }

private:
    std::optional<Cell> build_current() {
        const auto& own = ds_.points(target_);
        const auto& other = ds_.points(opposite(target_));
        const Sense sense = (target_ == Label::positive) ? Sense::ge : Sense::gt;

        Cell cell;
        cell.a_indices = a_idx_;
        cell.b_indices = b_idx_;
        cell.poly.sys.dimension = ds_.dimension();
        cell.poly.openness =
            (sense == Sense::gt) ? Polyhedron::Openness::open : Polyhedron::Openness::closed;
        for (size_t ai : a_idx_) {
            for (size_t cj = 0; cj < other.size(); ++cj) {
                if (std::find(b_idx_.begin(), b_idx_.end(), cj) != b_idx_.end()) continue;
                try {
                    cell.poly.sys.add(bisector(own[ai], other[cj], sense));
                } catch (const DegenerateBisector&) {
                    if (sense == Sense::gt) return std::nullopt;  // infeasible cell
                    // vacuous for >=: drop the constraint
                }
            }
        }
        return cell;
    }

    void advance() {
        const auto& other = ds_.points(opposite(target_));
        // B subsets: by size, then lexicographic.
        if (b_size_ > 0 && detail::next_subset(b_idx_, other.size())) return;
        if (b_size_ < std::min(b_max_, other.size())) {
            ++b_size_;
            b_idx_ = detail::first_subset(b_size_);
            return;
        }
        // next A subset
        const auto& own = ds_.points(target_);
        if (!detail::next_subset(a_idx_, own.size())) {
            done_ = true;
            return;
        }
        b_size_ = 0;
        b_idx_.clear();
    }

    const LabeledDataset& ds_;
    Label target_;
    int k_;
    size_t a_size_ = 0, b_max_ = 0, b_size_ = 0;
    std::vector<size_t> a_idx_, b_idx_;
    bool done_ = false;
    size_t ordinal_ = 0;
};

inline CellEnumeration cells(const LabeledDataset& ds, int k, Label target) {
    return CellEnumeration(ds, k, target);
}

}  // namespace nnex
