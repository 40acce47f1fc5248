#pragma once

#include <random>
#include <vector>

#include "nnex/classify.hpp"
#include "nnex/dataset.hpp"

namespace testutil {

using nnex::LabeledDataset;
using nnex::Rational;
using nnex::rat;
using nnex::Vec;

inline Vec vec(std::initializer_list<long long> xs) {
    Vec v;
    for (auto x : xs) v.push_back(Rational(x));
    return v;
}

inline std::vector<Vec> all_boolean_vectors(size_t n) {
    std::vector<Vec> out;
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        Vec v(n);
        for (size_t i = 0; i < n; ++i) v[i] = Rational((mask >> i) & 1);
        out.push_back(std::move(v));
    }
    return out;
}

/// The running 3-bit example: S+ = {(0,1,1),(1,0,1),(1,1,1)},
/// S- = everything else in {0,1}^3.
inline LabeledDataset example_dataset() {
    std::vector<Vec> pos = {vec({0, 1, 1}), vec({1, 0, 1}), vec({1, 1, 1})};
    std::vector<Vec> neg;
    for (auto& v : all_boolean_vectors(3)) {
        bool is_pos = false;
        for (auto& p : pos) is_pos = is_pos || (p == v);
        if (!is_pos) neg.push_back(v);
    }
    return LabeledDataset(3, pos, neg);
}

inline Vec random_boolean_vec(std::mt19937& rng, size_t n) {
    Vec v(n);
    for (size_t i = 0; i < n; ++i) v[i] = Rational(int(rng() & 1));
    return v;
}

/// Random rational vector on the lattice {j/2 : j in [-2*span, 2*span]}.
/// Half-integer values keep exact ties likely enough to matter.
inline Vec random_lattice_vec(std::mt19937& rng, size_t n, int span = 4) {
    std::uniform_int_distribution<int> d(-2 * span, 2 * span);
    Vec v(n);
    for (size_t i = 0; i < n; ++i) v[i] = Rational(d(rng), 2);
    return v;
}

inline LabeledDataset random_boolean_dataset(std::mt19937& rng, size_t n, size_t npos,
                                             size_t nneg) {
    std::vector<Vec> pos, neg;
    for (size_t i = 0; i < npos; ++i) pos.push_back(random_boolean_vec(rng, n));
    for (size_t i = 0; i < nneg; ++i) neg.push_back(random_boolean_vec(rng, n));
    return LabeledDataset(n, pos, neg);
}

inline LabeledDataset random_lattice_dataset(std::mt19937& rng, size_t n, size_t npos, size_t nneg,
                                             int span = 4) {
    std::vector<Vec> pos, neg;
    for (size_t i = 0; i < npos; ++i) pos.push_back(random_lattice_vec(rng, n, span));
    for (size_t i = 0; i < nneg; ++i) neg.push_back(random_lattice_vec(rng, n, span));
    return LabeledDataset(n, pos, neg);
}

}  // namespace testutil
