#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnex/classify.hpp"
#include "nnex/cnf.hpp"
#include "nnex/counterfactual.hpp"
#include "nnex/dataset.hpp"

namespace nnex {

// ---------------------------------------------------------------------------
// Internal solver: DPLL with counting propagation over cardinality
// constraints. Chronological backtracking, no clause learning; meant
// for desk-scale instances where zero external dependencies matter
// more than speed.
// ---------------------------------------------------------------------------

enum class SatStatus { satisfiable, unsatisfiable };

struct SatSolution {
    SatStatus status = SatStatus::unsatisfiable;
    std::vector<bool> model;  // 1-based; model[0] unused
    size_t decisions = 0;
};

class CardinalityDpll {
public:
    explicit CardinalityDpll(const CnfFormula& f) : f_(f) { f_.check(); }

    SatSolution solve() {
        const int n = f_.num_vars;
        assign_.assign(n + 1, 0);
        trail_.clear();
        SatSolution out;

        while (true) {
            int conflict = propagate();
            if (conflict) {
                if (!backtrack()) return out;  // unsat
                continue;
            }
            int var = 0;
            for (int v = 1; v <= n; ++v)
                if (assign_[v] == 0) {
                    var = v;
                    break;
                }
            if (var == 0) {
                out.status = SatStatus::satisfiable;
                out.model.assign(n + 1, false);
                for (int v = 1; v <= n; ++v) out.model[v] = assign_[v] > 0;
                out.decisions = decisions_;
                verify_model(out.model);
                return out;
            }
            ++decisions_;
            push(var, true, /*decision=*/true);
        }
    }

private:
    int lit_value(int lit) const {  // +1 true, -1 false, 0 unassigned
        int v = assign_[std::abs(lit)];
        return lit > 0 ? v : -v;
    }

    void push(int var, bool value, bool decision) {
        assign_[var] = value ? 1 : -1;
        trail_.push_back({var, decision, false});
    }

    // Returns nonzero on conflict.
    int propagate() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& c : f_.clauses) {
                int unassigned = 0, last = 0;
                bool sat = false;
                for (int l : c) {
                    int v = lit_value(l);
                    if (v > 0) {
                        sat = true;
                        break;
                    }
                    if (v == 0) {
                        ++unassigned;
                        last = l;
                    }
                }
                if (sat) continue;
                if (unassigned == 0) return 1;
                if (unassigned == 1) {
                    push(std::abs(last), last > 0, false);
                    changed = true;
                }
            }
            for (const auto& k : f_.cards) {
                int guard_val = k.guard ? lit_value(*k.guard) : 1;
                if (guard_val < 0) continue;  // inactive
                int ntrue = 0, nfree = 0;
                for (int l : k.literals) {
                    int v = lit_value(l);
                    if (v > 0) ++ntrue;
                    if (v == 0) ++nfree;
                }
                if (ntrue >= k.bound) continue;
                if (ntrue + nfree < k.bound) {
                    if (guard_val == 0) {  // constraint kills its guard
                        push(std::abs(*k.guard), *k.guard < 0, false);
                        changed = true;
                        continue;
                    }
                    return 2;
                }
                if (guard_val > 0 && ntrue + nfree == k.bound && nfree > 0) {
                    for (int l : k.literals)
                        if (lit_value(l) == 0) push(std::abs(l), l > 0, false);
                    changed = true;
                }
            }
        }
        return 0;
    }

    bool backtrack() {
        while (!trail_.empty()) {
            auto e = trail_.back();
            if (e.decision && !e.flipped) {
                bool was = assign_[e.var] > 0;
                trail_.pop_back();
                assign_[e.var] = 0;
                // re-push the opposite phase as a forced flip
                assign_[e.var] = was ? -1 : 1;
                trail_.push_back({e.var, true, true});
                return true;
            }
            trail_.pop_back();
            assign_[e.var] = 0;
        }
        return false;
    }

    void verify_model(const std::vector<bool>& model) const {
        auto holds = [&](int l) { return l > 0 ? model[l] : !model[-l]; };
        for (const auto& c : f_.clauses) {
            bool sat = false;
            for (int l : c) sat = sat || holds(l);
            if (!sat) throw std::logic_error("dpll model violates a clause");
        }
        for (const auto& k : f_.cards) {
            if (k.guard && !holds(*k.guard)) continue;
            int ntrue = 0;
            for (int l : k.literals) ntrue += holds(l);
            if (ntrue < k.bound) throw std::logic_error("dpll model violates a cardinality");
        }
    }

    struct TrailEntry {
        int var;
        bool decision;
        bool flipped;
    };

    CnfFormula f_;
    std::vector<int> assign_;
    std::vector<TrailEntry> trail_;
    size_t decisions_ = 0;
};

// ---------------------------------------------------------------------------
// External solver subprocess: gets a DIMACS file path, answers on
// stdout with `s SATISFIABLE` / `s UNSATISFIABLE` and `v` value lines.
// ---------------------------------------------------------------------------

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses conventional SAT-solver output. Exposed separately so the
/// contract is testable without a real solver installed.
inline SatSolution parse_solver_output(const std::string& text, int num_vars) {
    SatSolution out;
    std::istringstream in(text);
    std::string line;
    bool answered = false;
    out.model.assign(num_vars + 1, false);
    while (std::getline(in, line)) {
        if (line.rfind("s ", 0) == 0) {
            if (line.find("UNSATISFIABLE") != std::string::npos) {
                out.status = SatStatus::unsatisfiable;
                answered = true;
            } else if (line.find("SATISFIABLE") != std::string::npos) {
                out.status = SatStatus::satisfiable;
                answered = true;
            }
        } else if (line.rfind("v", 0) == 0 && (line.size() == 1 || line[1] == ' ')) {
            std::istringstream vs(line.substr(1));
            long long lit;
            while (vs >> lit) {
                if (lit == 0) continue;
                long long v = lit > 0 ? lit : -lit;
                if (v <= num_vars) out.model[size_t(v)] = lit > 0;
            }
        }
    }
    if (!answered) throw BackendError("solver output carries no s-line");
    return out;
}

struct SatBackend {
    enum class Kind { internal, external };
    Kind kind = Kind::internal;
    std::string command;  // e.g. "minisat -verb=0"; file path is appended

    static SatBackend internal() { return {}; }
    static SatBackend external(std::string cmd) {
        SatBackend b;
        b.kind = Kind::external;
        b.command = std::move(cmd);
        return b;
    }
};

inline SatSolution run_external_solver(const std::string& command, const CnfFormula& f) {
    CnfFormula flat = expand_cards(f);
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path();
    fs::path file = dir / ("nnex_sat_" + std::to_string(::getpid()) + "_" +
                           std::to_string(reinterpret_cast<uintptr_t>(&f) % 100000) + ".cnf");
    {
        std::ofstream out(file);
        write_dimacs(out, flat);
    }
    std::string cmd = command + " " + file.string() + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        fs::remove(file);
        throw BackendError("cannot launch solver: " + command);
    }
    std::string output;
    char buf[4096];
    size_t got;
    while ((got = ::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
    int rc = ::pclose(pipe);
    fs::remove(file);
    try {
        SatSolution sol = parse_solver_output(output, flat.num_vars);
        return sol;
    } catch (const BackendError&) {
        throw BackendError("unparsable solver output (exit status " + std::to_string(rc) +
                           ") from: " + command);
    }
}

inline SatSolution solve_formula(const CnfFormula& f, const SatBackend& backend,
                                 SolverStats* stats = nullptr) {
    if (backend.kind == SatBackend::Kind::internal) {
        CardinalityDpll solver(f);
        SatSolution sol = solver.solve();
        if (stats) stats->sat_decisions += sol.decisions;
        return sol;
    }
    return run_external_solver(backend.command, f);
}

// ---------------------------------------------------------------------------
// 1-NN counterfactual encoding.
// ---------------------------------------------------------------------------

/// CNF + guarded-cardinality encoding of "some opposite-class point is
/// closest to y, and d_H(x, y) <= budget" for the 1-NN classifier.
/// Variables: y_1..y_n, then one guard per opposite-class point. For a
/// positively classified x the guard demands its point strictly closer
/// than every positive (bound floor(t/2) + 1); for a negative x the
/// mirrored direction uses the non-strict bound ceil(t/2), matching the
/// tie-breaking of the classifier. Duplicate points across classes are
/// rejected.
inline CnfFormula sat_encode_cf_1nn(const LabeledDataset& ds, const Vec& x, int budget) {
    ds.check_dim(x);
    if (!ds.is_boolean() || !is_boolean_vector(x))
        throw std::invalid_argument("sat encoding needs boolean data");
    const int n = int(ds.dimension());
    const Label fx = classify_optimistic(ds, MetricSpec::hamming(), 1, x);
    const bool strict = (fx == Label::positive);  // flipping to label 0 needs <
    const auto& anchors = ds.points(opposite(fx));  // guarded candidates o
    const auto& rivals = ds.points(fx);             // compared-against s

    CnfFormula f;
    f.num_vars = n + int(anchors.size());

    std::vector<int> anchor_clause;
    for (size_t i = 0; i < anchors.size(); ++i) anchor_clause.push_back(n + 1 + int(i));
    f.clauses.push_back(anchor_clause);

    for (size_t i = 0; i < anchors.size(); ++i) {
        const Vec& o = anchors[i];
        for (const Vec& s : rivals) {
            CardinalityGe card;
            card.guard = n + 1 + int(i);
            for (int t = 0; t < n; ++t) {
                bool ot = o[size_t(t)] == Rational(1);
                bool st = s[size_t(t)] == Rational(1);
                if (!ot && st) card.literals.push_back(-(t + 1));  // Delta_0: want y_t = o_t = 0
                if (ot && !st) card.literals.push_back(t + 1);     // Delta_1: want y_t = o_t = 1
            }
            if (card.literals.empty())
                throw std::invalid_argument(
                    "duplicate point across classes: the encoding has no satisfying guard");
            int total = int(card.literals.size());
            card.bound = strict ? total / 2 + 1 : (total + 1) / 2;
            f.cards.push_back(std::move(card));
        }
    }

    if (budget < n) {  // d_H(x, y) <= budget, vacuous at budget >= n
        CardinalityGe agree;
        for (int t = 0; t < n; ++t)
            agree.literals.push_back(x[size_t(t)] == Rational(1) ? (t + 1) : -(t + 1));
        agree.bound = n - budget;
        f.cards.push_back(std::move(agree));
    }
    f.check();
    return f;
}

/// Closest counterfactual through the SAT pipeline: binary search over
/// the Hamming budget, decode the y-block of the model, validate the
/// witness against the real classifier. A model that fails validation
/// is an encoding bug and throws.
inline CounterfactualResult sat_solve_cf_1nn(const LabeledDataset& ds, const Vec& x,
                                             const Rational& budget,
                                             const SatBackend& backend = {},
                                             SolverStats* stats = nullptr) {
    ds.check_dim(x);
    const MetricSpec m = MetricSpec::hamming();
    const int n = int(ds.dimension());
    const Label fx = classify_optimistic(ds, m, 1, x);

    int cap = 0;
    while (Rational(cap + 1) <= budget && cap < n) ++cap;

    auto attempt = [&](int k) -> std::optional<Vec> {
        CnfFormula f = sat_encode_cf_1nn(ds, x, k);
        SatSolution sol = solve_formula(f, backend, stats);
        if (sol.status != SatStatus::satisfiable) return std::nullopt;
        auto y = Vec(size_t(n));
        for (int t = 0; t < n; ++t) y[size_t(t)] = Rational(sol.model[size_t(t) + 1] ? 1 : 0);
        if (classify_optimistic(ds, m, 1, y) == fx)
            throw std::logic_error("sat model decodes to a non-flipping witness (encoding bug)");
        if (distance_powered(x, y, m) > Rational(k))
            throw std::logic_error("sat model exceeds its own budget (encoding bug)");
        return y;
    };

    auto top = attempt(cap);
    if (!top) return {};

    int lo = 0, hi = cap;
    Vec best = *top;
    while (lo < hi) {
        int mid = lo + (hi - lo) / 2;
        if (auto got = attempt(mid)) {
            best = *got;
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }

    CounterfactualResult res;
    res.status = CounterfactualResult::Status::exists;
    res.witness = best;
    res.achieved_powered = distance_powered(x, best, m);
    if (*res.achieved_powered != Rational(hi))
        throw std::logic_error("sat pipeline: model distance disagrees with the minimal budget");
    res.provenance = "sat budget " + std::to_string(hi);
    detail::validate_witness(ds, m, 1, x, best, budget, true);
    return res;
}

}  // namespace nnex
