#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnex/rational.hpp"

namespace nnex {

enum class Label : int { negative = 0, positive = 1 };

inline int label_value(Label l) { return static_cast<int>(l); }
inline Label label_from(int v) {
    if (v != 0 && v != 1) throw std::invalid_argument("label must be 0 or 1");
    return v ? Label::positive : Label::negative;
}
inline Label opposite(Label l) {
    return l == Label::positive ? Label::negative : Label::positive;
}

enum class ValueDomain { boolean, rational };

/// Distance family: Hamming over {0,1}^n, or the lp-norm distance over
/// rationals for an integer p >= 1. Hamming pairs only with the boolean
/// domain, lp only with the rational domain.
struct MetricSpec {
    enum class Kind { hamming, lp };
    Kind kind = Kind::hamming;
    int p = 0;  // exponent, meaningful for lp only

    static MetricSpec hamming() { return {Kind::hamming, 0}; }
    static MetricSpec lp(int p) {
        if (p < 1) throw std::invalid_argument("lp metric needs integer p >= 1");
        return {Kind::lp, p};
    }
    static MetricSpec l1() { return lp(1); }
    static MetricSpec l2() { return lp(2); }

    bool is_hamming() const { return kind == Kind::hamming; }
    bool is_lp(int q) const { return kind == Kind::lp && p == q; }

    std::string name() const {
        if (kind == Kind::hamming) return "hamming";
        return "l" + std::to_string(p);
    }

    /// Parses "hamming", "l1", "l2" or "lp:<p>".
    static MetricSpec parse(std::string_view s) {
        if (s == "hamming") return hamming();
        if (s == "l1") return l1();
        if (s == "l2") return l2();
        if (s.rfind("lp:", 0) == 0) {
            int p = std::atoi(std::string(s.substr(3)).c_str());
            return lp(p);
        }
        if (s.size() > 1 && s[0] == 'l') {
            int p = std::atoi(std::string(s.substr(1)).c_str());
            if (p >= 1) return lp(p);
        }
        throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
    }

    bool operator==(const MetricSpec&) const = default;
};

inline bool is_boolean_vector(const Vec& v) {
    return std::all_of(v.begin(), v.end(),
                       [](const Rational& r) { return r == Rational(0) || r == Rational(1); });
}

/// Training data: positive examples S+ and negative examples S- over a
/// shared dimension. Immutable after construction; safe to share across
/// threads.
class LabeledDataset {
public:
    LabeledDataset(size_t dimension, std::vector<Vec> positives, std::vector<Vec> negatives)
        : dimension_(dimension), positives_(std::move(positives)), negatives_(std::move(negatives)) {
        if (dimension_ == 0) throw std::invalid_argument("dimension must be positive");
        for (const auto& v : positives_) check_dim(v);
        for (const auto& v : negatives_) check_dim(v);
    }

    size_t dimension() const { return dimension_; }
    const std::vector<Vec>& positives() const { return positives_; }
    const std::vector<Vec>& negatives() const { return negatives_; }
    size_t total_points() const { return positives_.size() + negatives_.size(); }

    const std::vector<Vec>& points(Label side) const {
        return side == Label::positive ? positives_ : negatives_;
    }

    /// True when every coordinate of every point is 0 or 1.
    bool is_boolean() const {
        auto ok = [](const std::vector<Vec>& vs) {
            return std::all_of(vs.begin(), vs.end(), is_boolean_vector);
        };
        return ok(positives_) && ok(negatives_);
    }

    ValueDomain domain() const {
        return is_boolean() ? ValueDomain::boolean : ValueDomain::rational;
    }

    void require_compatible(const MetricSpec& m) const {
        if (m.is_hamming() && !is_boolean())
            throw std::invalid_argument("hamming metric requires a boolean dataset");
    }

    void check_dim(const Vec& v) const {
        if (v.size() != dimension_)
            throw std::invalid_argument("vector has length " + std::to_string(v.size()) +
                                        ", dataset dimension is " + std::to_string(dimension_));
    }

private:
    size_t dimension_;
    std::vector<Vec> positives_;
    std::vector<Vec> negatives_;
};

inline void require_odd_k(int k) {
    if (k < 1 || k % 2 == 0)
        throw std::invalid_argument("k must be an odd integer >= 1, got " + std::to_string(k));
}

// ---------------------------------------------------------------------------
// CSV input/output. One row per point: n feature values, then a final 0/1
// label column. A header row is tolerated and skipped. Values are decimal
// literals converted to exact rationals.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

inline bool looks_numeric_row(const std::vector<std::string>& cells) {
    for (const auto& c : cells) {
        try {
            parse_rational(c);
        } catch (const std::invalid_argument&) {
            return false;
        }
    }
    return !cells.empty();
}

}  // namespace detail

inline LabeledDataset read_dataset_csv(std::istream& in, const std::string& origin = "<stream>") {
    std::vector<Vec> pos, neg;
    std::optional<size_t> width;
    std::string line;
    size_t lineno = 0;
    bool first_content_row = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cells = detail::split_csv_row(line);
        if (first_content_row && !detail::looks_numeric_row(cells)) {
            first_content_row = false;  // header row
            continue;
        }
        first_content_row = false;
        if (cells.size() < 2)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": row needs at least one feature and a label");
        if (!width) width = cells.size();
        if (cells.size() != *width)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": row has " +
                                     std::to_string(cells.size()) + " columns, expected " +
                                     std::to_string(*width));
        Vec v;
        v.reserve(cells.size() - 1);
        try {
            for (size_t i = 0; i + 1 < cells.size(); ++i) v.push_back(parse_rational(cells[i]));
            Rational lab = parse_rational(cells.back());
            if (lab == Rational(1))
                pos.push_back(std::move(v));
            else if (lab == Rational(0))
                neg.push_back(std::move(v));
            else
                throw std::invalid_argument("label must be 0 or 1");
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!width) throw std::runtime_error(origin + ": empty dataset");
    return LabeledDataset(*width - 1, std::move(pos), std::move(neg));
}

inline LabeledDataset read_dataset_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return read_dataset_csv(in, path);
}

inline void write_dataset_csv(std::ostream& out, const LabeledDataset& ds) {
    auto row = [&](const Vec& v, int label) {
        for (const auto& r : v) {
            // Emit exact values; integers stay plain, otherwise num/den.
            out << to_string(r) << ',';
        }
        out << label << '\n';
    };
    for (const auto& v : ds.positives()) row(v, 1);
    for (const auto& v : ds.negatives()) row(v, 0);
}

/// Query vector: either an inline comma-separated literal or a single-row
/// CSV file of feature values (no label column).
inline Vec parse_vector(std::string_view text) {
    Vec v;
    std::string cell;
    std::stringstream ss{std::string(text)};
    while (std::getline(ss, cell, ',')) v.push_back(parse_rational(cell));
    if (v.empty()) throw std::invalid_argument("empty vector literal");
    return v;
}

inline Vec read_vector_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vector file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto cells = detail::split_csv_row(line);
        if (!detail::looks_numeric_row(cells)) continue;  // header
        return parse_vector(line);
    }
    throw std::runtime_error(path + ": no vector row found");
}

}  // namespace nnex
