#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnex/rational.hpp"

namespace nnex {

enum class Sense { ge, gt, eq };  // a^T y  (>=, >, =)  b

inline const char* sense_text(Sense s) {
    switch (s) {
        case Sense::ge: return ">=";
        case Sense::gt: return ">";
        case Sense::eq: return "=";
    }
    return "?";
}

struct LinearInequality {
    Vec coeffs;
    Rational rhs;
    Sense sense = Sense::ge;

    Rational eval(const Vec& y) const {
        if (y.size() != coeffs.size()) throw std::invalid_argument("eval: dimension mismatch");
        Rational acc(0);
        for (size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * y[i];
        return acc;
    }

    bool satisfied_by(const Vec& y) const {
        Rational v = eval(y);
        switch (sense) {
            case Sense::ge: return v >= rhs;
            case Sense::gt: return v > rhs;
            case Sense::eq: return v == rhs;
        }
        return false;
    }

    bool is_constant() const {
        for (const auto& c : coeffs)
            if (c != Rational(0)) return false;
        return true;
    }

    /// A constant row is decided by its right-hand side alone.
    bool constant_holds() const {
        switch (sense) {
            case Sense::ge: return Rational(0) >= rhs;
            case Sense::gt: return Rational(0) > rhs;
            case Sense::eq: return Rational(0) == rhs;
        }
        return false;
    }
};

struct LinearSystem {
    size_t dimension = 0;
    std::vector<LinearInequality> rows;

    void add(LinearInequality ineq) {
        if (ineq.coeffs.size() != dimension)
            throw std::invalid_argument("row dimension mismatch");
        rows.push_back(std::move(ineq));
    }

    bool satisfied_by(const Vec& y) const {
        for (const auto& r : rows)
            if (!r.satisfied_by(y)) return false;
        return true;
    }
};

/// Conjunction of halfspaces. Closed polyhedra carry only >= and =
/// rows; open ones only strict rows.
struct Polyhedron {
    enum class Openness { closed, open };

    LinearSystem sys;
    Openness openness = Openness::closed;

    size_t dimension() const { return sys.dimension; }
    const std::vector<LinearInequality>& constraints() const { return sys.rows; }

    static Polyhedron closed(LinearSystem s) {
        for (const auto& r : s.rows)
            if (r.sense == Sense::gt)
                throw std::invalid_argument("closed polyhedron cannot hold strict rows");
        return {std::move(s), Openness::closed};
    }

    static Polyhedron open(LinearSystem s) {
        for (const auto& r : s.rows)
            if (r.sense != Sense::gt)
                throw std::invalid_argument("open polyhedron holds only strict rows");
        return {std::move(s), Openness::open};
    }

    bool is_open() const { return openness == Openness::open; }

    /// Same halfspaces with strict rows relaxed to non-strict.
    Polyhedron closure() const {
        LinearSystem s = sys;
        for (auto& r : s.rows)
            if (r.sense == Sense::gt) r.sense = Sense::ge;
        return {std::move(s), Openness::closed};
    }

    bool contains(const Vec& y) const { return sys.satisfied_by(y); }

    /// Exact-rational text dump, one constraint per line; used by golden
    /// tests.
    std::string dump() const {
        std::ostringstream out;
        for (const auto& r : sys.rows) {
            for (size_t i = 0; i < r.coeffs.size(); ++i) {
                if (i) out << ' ';
                out << to_string(r.coeffs[i]);
            }
            out << ' ' << sense_text(r.sense) << ' ' << to_string(r.rhs) << '\n';
        }
        return out.str();
    }
};

}  // namespace nnex
