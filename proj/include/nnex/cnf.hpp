#pragma once

#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnex {

/// A lower-bound cardinality constraint, optionally guarded:
/// guard -> (sum of literals >= bound). Literals are DIMACS-style
/// signed integers.
struct CardinalityGe {
    std::optional<int> guard;
    std::vector<int> literals;
    int bound = 0;
};

struct CnfFormula {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;
    std::vector<CardinalityGe> cards;

    void check() const {
        auto lit_ok = [&](int l) { return l != 0 && std::abs(l) <= num_vars; };
        for (const auto& c : clauses)
            for (int l : c)
                if (!lit_ok(l)) throw std::invalid_argument("clause literal out of range");
        for (const auto& k : cards) {
            if (k.guard && !lit_ok(*k.guard))
                throw std::invalid_argument("guard literal out of range");
            for (int l : k.literals)
                if (!lit_ok(l)) throw std::invalid_argument("cardinality literal out of range");
            if (k.bound < 0 || k.bound > int(k.literals.size()))
                throw std::invalid_argument("cardinality bound out of range");
        }
    }
};

/// Expands one cardinality constraint to plain clauses, allocating
/// auxiliary variables from next_var. Sequential-counter construction:
/// the bound is rewritten as "at most |lits| - bound of the negated
/// literals" and counted left to right. Equisatisfiable and
/// model-projecting: original-variable assignments survive unchanged.
/// A guard adds its negation to every emitted clause.
inline std::vector<std::vector<int>> cardinality_to_cnf(const CardinalityGe& card,
                                                        int& next_var) {
    if (card.bound < 1) throw std::invalid_argument("cardinality bound must be >= 1");
    const int t = int(card.literals.size());
    if (card.bound > t) throw std::invalid_argument("cardinality bound exceeds arity");

    std::vector<std::vector<int>> out;
    auto emit = [&](std::vector<int> clause) {
        if (card.guard) clause.insert(clause.begin(), -*card.guard);
        out.push_back(std::move(clause));
    };

    if (card.bound == t) {  // every literal is forced
        for (int l : card.literals) emit({l});
        return out;
    }
    if (card.bound == 1) {
        emit(card.literals);
        return out;
    }

    // sum lits >= b  <=>  sum (!lits) <= t - b =: K, with 1 <= K <= t-2.
    const int K = t - card.bound;
    // registers r[i][j] ("at least j+1 of the first i+1 negated literals"),
    // i in [0, t-2], j in [0, K-1]
    std::vector<std::vector<int>> reg(t - 1, std::vector<int>(K));
    for (auto& row : reg)
        for (auto& v : row) v = ++next_var;
    auto x = [&](int i) { return -card.literals[i]; };  // negated literal

    emit({-x(0), reg[0][0]});
    for (int j = 1; j < K; ++j) emit({-reg[0][j]});
    for (int i = 1; i < t - 1; ++i) {
        emit({-x(i), reg[i][0]});
        emit({-reg[i - 1][0], reg[i][0]});
        for (int j = 1; j < K; ++j) {
            emit({-x(i), -reg[i - 1][j - 1], reg[i][j]});
            emit({-reg[i - 1][j], reg[i][j]});
        }
        emit({-x(i), -reg[i - 1][K - 1]});
    }
    emit({-x(t - 1), -reg[t - 2][K - 1]});
    return out;
}

/// Pure-CNF expansion of the whole formula.
inline CnfFormula expand_cards(const CnfFormula& f) {
    f.check();
    CnfFormula out;
    out.num_vars = f.num_vars;
    out.clauses = f.clauses;
    for (const auto& card : f.cards) {
        if (card.bound == 0) continue;  // trivially true
        auto clauses = cardinality_to_cnf(card, out.num_vars);
        out.clauses.insert(out.clauses.end(), clauses.begin(), clauses.end());
    }
    return out;
}

/// Standard DIMACS text for the expanded formula.
inline void write_dimacs(std::ostream& os, const CnfFormula& f) {
    CnfFormula flat = expand_cards(f);
    os << "p cnf " << flat.num_vars << ' ' << flat.clauses.size() << '\n';
    for (const auto& c : flat.clauses) {
        for (int l : c) os << l << ' ';
        os << "0\n";
    }
}

/// Extended format with native cardinality lines under a `p knf`
/// header: `k <bound> <lits...> 0`. A guarded constraint is expanded
/// into an unguarded one by prepending `bound` copies of the negated
/// guard (a false guard then satisfies the line on its own); each such
/// line is preceded by a comment noting the expansion.
inline void write_knf(std::ostream& os, const CnfFormula& f) {
    f.check();
    os << "p knf " << f.num_vars << ' ' << (f.clauses.size() + f.cards.size()) << '\n';
    for (const auto& c : f.clauses) {
        for (int l : c) os << l << ' ';
        os << "0\n";
    }
    for (const auto& card : f.cards) {
        if (card.guard)
            os << "c guard " << *card.guard << " expanded as " << card.bound << " copies of "
               << -*card.guard << '\n';
        os << "k " << card.bound << ' ';
        if (card.guard)
            for (int i = 0; i < card.bound; ++i) os << -*card.guard << ' ';
        for (int l : card.literals) os << l << ' ';
        os << "0\n";
    }
}

inline std::string to_dimacs_string(const CnfFormula& f) {
    std::ostringstream os;
    write_dimacs(os, f);
    return os.str();
}

inline std::string to_knf_string(const CnfFormula& f) {
    std::ostringstream os;
    write_knf(os, f);
    return os.str();
}

}  // namespace nnex
