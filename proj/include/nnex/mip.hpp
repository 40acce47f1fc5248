#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

#include "nnex/classify.hpp"
#include "nnex/dataset.hpp"

namespace nnex {

namespace detail {

// "name" or "- name", continuing a sum.
inline void append_term(std::ostream& os, bool& first, int coef, const std::string& name) {
    if (coef == 0) return;
    if (first) {
        if (coef < 0) os << "- ";
        first = false;
    } else {
        os << (coef < 0 ? " - " : " + ");
    }
    os << name;
}

}  // namespace detail

/// LP-format text of the integer program for a closest discrete 1-NN
/// counterfactual: binary y, integer class distances dp/dm defined
/// through indicator-linearized minima (one indicator per training
/// point, m <= r_i, v_i * r_i <= m, sum v_i = 1), and the flip
/// constraint. A positively classified x demands dm <= dp - 1 (the
/// strict direction); a negative x the non-strict mirror dp <= dm.
/// The squared distance of a 0/1 vector equals its Hamming distance,
/// so the objective is linear; its constant offset is noted in the
/// header comment. Output is deterministic byte for byte.
inline std::string emit_mip_cf_discrete(const LabeledDataset& ds, const Vec& x) {
    ds.check_dim(x);
    if (!ds.is_boolean() || !is_boolean_vector(x))
        throw std::invalid_argument("emit_mip_cf_discrete needs boolean data");
    const size_t n = ds.dimension();
    const Label fx = classify_optimistic(ds, MetricSpec::hamming(), 1, x);

    int ones = 0;
    for (size_t i = 0; i < n; ++i) ones += x[i] == Rational(1);

    std::ostringstream os;
    os << "\\ closest counterfactual for a 1-nn classifier over {0,1}^" << n << "\n";
    os << "\\ query classified " << (fx == Label::positive ? "positive" : "negative")
       << "; hamming distance to the query = objective + " << ones << "\n";
    os << "Minimize\n obj: ";
    bool first = true;
    for (size_t i = 0; i < n; ++i)
        detail::append_term(os, first, x[i] == Rational(1) ? -1 : 1, "y" + std::to_string(i + 1));
    if (first) os << "0 y1";
    os << "\nSubject To\n";

    auto emit_side = [&](const std::vector<Vec>& pts, const std::string& vtag,
                         const std::string& dvar) {
        for (size_t j = 0; j < pts.size(); ++j) {
            const Vec& z = pts[j];
            int c = 0;
            for (size_t i = 0; i < n; ++i) c += z[i] == Rational(1);
            // dvar <= r_j, with r_j = c + sum (1 - 2 z_i) y_i
            os << ' ' << dvar << "_le_" << (j + 1) << ": " << dvar;
            for (size_t i = 0; i < n; ++i) {
                int coef = z[i] == Rational(1) ? 1 : -1;  // -(1 - 2 z_i)
                os << (coef < 0 ? " - " : " + ") << "y" << (i + 1);
            }
            os << " <= " << c << "\n";
            // v_j * r_j <= dvar, as linear part + quadratic bracket
            std::string vname = vtag + std::to_string(j + 1);
            os << ' ' << vtag << "_min_" << (j + 1) << ": ";
            if (c != 0) os << c << ' ' << vname << ' ';
            os << "[ ";
            bool fq = true;
            for (size_t i = 0; i < n; ++i) {
                int coef = z[i] == Rational(1) ? -1 : 1;  // (1 - 2 z_i)
                if (fq) {
                    os << (coef < 0 ? "- " : "");
                    fq = false;
                } else {
                    os << (coef < 0 ? " - " : " + ");
                }
                os << vname << " * y" << (i + 1);
            }
            os << " ] - " << dvar << " <= 0\n";
        }
        os << " pick_" << vtag << ":";
        for (size_t j = 0; j < pts.size(); ++j) os << (j ? " + " : " ") << vtag << (j + 1);
        os << " = 1\n";
    };

    emit_side(ds.positives(), "vp", "dp");
    emit_side(ds.negatives(), "vm", "dm");

    if (fx == Label::positive)
        os << " flip: dm - dp <= -1\n";
    else
        os << " flip: dp - dm <= 0\n";

    os << "Bounds\n dp >= 0\n dm >= 0\nBinaries\n";
    for (size_t i = 0; i < n; ++i) os << " y" << (i + 1);
    for (size_t j = 0; j < ds.positives().size(); ++j) os << " vp" << (j + 1);
    for (size_t j = 0; j < ds.negatives().size(); ++j) os << " vm" << (j + 1);
    os << "\nGenerals\n dp dm\nEnd\n";
    return os.str();
}

}  // namespace nnex
