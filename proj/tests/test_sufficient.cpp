#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "nnex/sufficient.hpp"

using namespace nnex;
using testutil::vec;

TEST_CASE("running example: sufficiency landscape at x = (0,0,0), k = 1") {
    auto ds = testutil::example_dataset();
    Vec x = vec({0, 0, 0});

    auto check = make_checker(ds, MetricSpec::hamming(), 1, x);
    CHECK(check(FeatureSet{0, 1}).sufficient);
    CHECK(check(FeatureSet{2}).sufficient);
    CHECK_FALSE(check(FeatureSet{0}).sufficient);
    CHECK_FALSE(check(FeatureSet{1}).sufficient);
    CHECK_FALSE(check(FeatureSet{}).sufficient);
    CHECK(check(FeatureSet{0, 1, 2}).sufficient);
}

TEST_CASE("running example at k = 3: optimistic ties shrink the landscape") {
    // At k = 3 the completion (0,0,1) sits at distance 0 from itself and
    // ties two positives at distance 1; the optimistic rule fills the
    // remaining two slots with positives and flips it to label 1. So
    // {0,1} stops being sufficient while {2} survives.
    auto ds = testutil::example_dataset();
    Vec x = vec({0, 0, 0});
    CHECK(classify_optimistic(ds, MetricSpec::hamming(), 3, vec({0, 0, 1})) == Label::positive);
    auto check = make_checker(ds, MetricSpec::hamming(), 3, x);
    CHECK_FALSE(check(FeatureSet{0, 1}).sufficient);
    CHECK(check(FeatureSet{2}).sufficient);
    CHECK(check(FeatureSet{0, 1, 2}).sufficient);
}

TEST_CASE("running example: minimum and minimal sufficient reasons") {
    auto ds = testutil::example_dataset();
    Vec x = vec({0, 0, 0});
    auto check = make_checker(ds, MetricSpec::hamming(), 1, x);

    auto min1 = minimum_sr_exact(3, 1, check);
    REQUIRE(min1.has_value());
    CHECK(*min1 == FeatureSet{2});

    // Greedy outcomes traced by hand: the default descending order drops
    // index 2 first ({0,1} stays sufficient) and then gets stuck; the
    // ascending order reaches {2}. Both are verified minimal.
    CHECK(minimal_sr(3, check) == FeatureSet{0, 1});
    CHECK(minimal_sr(3, check, {0, 1, 2}) == FeatureSet{2});
}

TEST_CASE("full set is always sufficient; empty bound gives no minimum") {
    auto ds = testutil::example_dataset();
    Vec x = vec({0, 0, 0});
    auto check = make_checker(ds, MetricSpec::hamming(), 1, x);
    CHECK(check(FeatureSet::full(3)).sufficient);
    CHECK_FALSE(minimum_sr_exact(3, 0, check).has_value());
}

TEST_CASE("constant classifier: empty set suffices") {
    LabeledDataset ds(3, {vec({0, 1, 1}), vec({1, 0, 1})}, {vec({0, 0, 0})});
    // k = 3 with 2 positives forces label 1 everywhere.
    auto check = make_checker(ds, MetricSpec::hamming(), 3, vec({1, 1, 1}));
    CHECK(check(FeatureSet{}).sufficient);
    CHECK(minimal_sr(3, check) == FeatureSet{});
}

TEST_CASE("check_sr_l2 hand case: one pinned coordinate decides") {
    LabeledDataset ds(2, {vec({2, 0})}, {vec({0, 0})});
    Vec x = vec({2, 1});
    // Pinning y1 = 2 keeps every completion closer to (2,0): sufficient.
    CHECK(check_sr_l2(ds, 1, x, FeatureSet{0}).sufficient);
    // Pinning only y2 = 1 leaves y1 free to cross the bisector.
    auto v = check_sr_l2(ds, 1, x, FeatureSet{1});
    CHECK_FALSE(v.sufficient);
    REQUIRE(v.counterexample.has_value());
    CHECK((*v.counterexample)[1] == rat(1));
    CHECK(classify_optimistic(ds, MetricSpec::l2(), 1, *v.counterexample) == Label::negative);
    // The full set is trivially sufficient.
    CHECK(check_sr_l2(ds, 1, x, FeatureSet{0, 1}).sufficient);
}

TEST_CASE("check_sr_l2 agrees with a falsification grid") {
    std::mt19937 rng(51);
    for (int t = 0; t < 30; ++t) {
        size_t n = 2;
        auto ds = testutil::random_lattice_dataset(rng, n, 1 + rng() % 2, 1 + rng() % 2, 2);
        int k = 1;
        auto x = testutil::random_lattice_vec(rng, n, 2);
        FeatureSet X;
        for (size_t i = 0; i < n; ++i)
            if (rng() % 2) X.indices.push_back(i);
        X.normalize();
        auto verdict = check_sr_l2(ds, k, x, X);

        // Falsification-only oracle: a grid hit proves "not sufficient".
        bool grid_flip = false;
        Label fx = classify_optimistic(ds, MetricSpec::l2(), k, x);
        for (int a = -12; a <= 12 && !grid_flip; ++a) {
            for (int b = -12; b <= 12 && !grid_flip; ++b) {
                Vec z = {rat(a, 2), rat(b, 2)};
                for (size_t i : X.indices) z[i] = x[i];
                grid_flip = classify_optimistic(ds, MetricSpec::l2(), k, z) != fx;
            }
        }
        if (grid_flip) CHECK_FALSE(verdict.sufficient);
    }
}

TEST_CASE("check_sr_l1_k1 hand cases") {
    LabeledDataset ds(2, {vec({0, 0})}, {vec({4, 4})});
    Vec x = vec({4, 4});
    CHECK(classify_optimistic(ds, MetricSpec::l1(), 1, x) == Label::negative);
    auto v = check_sr_l1_k1(ds, x, FeatureSet{});
    CHECK_FALSE(v.sufficient);
    REQUIRE(v.counterexample.has_value());
    CHECK(*v.counterexample == vec({0, 0}));
    CHECK(check_sr_l1_k1(ds, x, FeatureSet{0, 1}).sufficient);
}

TEST_CASE("check_sr_l1_k1 matches lattice falsification") {
    std::mt19937 rng(53);
    for (int t = 0; t < 40; ++t) {
        size_t n = 2 + rng() % 2;
        auto ds = testutil::random_lattice_dataset(rng, n, 1 + rng() % 3, 1 + rng() % 3, 2);
        auto x = testutil::random_lattice_vec(rng, n, 2);
        FeatureSet X;
        for (size_t i = 0; i < n; ++i)
            if (rng() % 2) X.indices.push_back(i);
        X.normalize();
        auto verdict = check_sr_l1_k1(ds, x, X);

        bool lattice_flip = false;
        Label fx = classify_optimistic(ds, MetricSpec::l1(), 1, x);
        std::vector<size_t> free_idx;
        for (size_t i = 0; i < n; ++i)
            if (!X.contains(i)) free_idx.push_back(i);
        std::vector<int> odo(free_idx.size(), -8);
        while (!lattice_flip) {
            Vec z = x;
            for (size_t j = 0; j < free_idx.size(); ++j) z[free_idx[j]] = rat(odo[j], 2);
            lattice_flip = classify_optimistic(ds, MetricSpec::l1(), 1, z) != fx;
            size_t j = 0;
            for (; j < odo.size(); ++j) {
                if (++odo[j] <= 8) break;
                odo[j] = -8;
            }
            if (j == odo.size()) break;
        }
        // A lattice hit proves "not sufficient"; the candidate rule is
        // complete, so a sufficient verdict rules hits out.
        if (lattice_flip) CHECK_FALSE(verdict.sufficient);
    }
}

TEST_CASE("hamming k=1 checker equals the exhaustive oracle") {
    std::mt19937 rng(59);
    for (int t = 0; t < 200; ++t) {
        size_t n = 2 + rng() % 11;  // up to 12
        auto ds = testutil::random_boolean_dataset(rng, n, 1 + rng() % 4, 1 + rng() % 4);
        auto x = testutil::random_boolean_vec(rng, n);
        FeatureSet X;
        for (size_t i = 0; i < n; ++i)
            if (rng() % 2) X.indices.push_back(i);
        X.normalize();
        auto fast = check_sr_hamming_k1(ds, x, X);
        auto slow = check_sr_bruteforce(ds, MetricSpec::hamming(), 1, x, X);
        CHECK(fast.sufficient == slow.sufficient);
    }
}

TEST_CASE("monotonicity: supersets of sufficient sets are sufficient") {
    std::mt19937 rng(61);
    for (int t = 0; t < 60; ++t) {
        size_t n = 3 + rng() % 3;
        auto ds = testutil::random_boolean_dataset(rng, n, 1 + rng() % 3, 1 + rng() % 3);
        auto x = testutil::random_boolean_vec(rng, n);
        int k = (t % 3 == 0) ? 3 : 1;
        if (ds.total_points() < size_t(k)) continue;
        auto check = make_checker(ds, MetricSpec::hamming(), k, x);
        FeatureSet X;
        for (size_t i = 0; i < n; ++i)
            if (rng() % 2) X.indices.push_back(i);
        X.normalize();
        if (check(X).sufficient) {
            for (size_t i = 0; i < n; ++i)
                if (!X.contains(i)) CHECK(check(X.with(i)).sufficient);
        }
    }
}

TEST_CASE("counterexamples agree with x on X and flip the label") {
    std::mt19937 rng(67);
    for (int t = 0; t < 80; ++t) {
        size_t n = 2 + rng() % 3;
        bool boolean = t % 2;
        auto ds = boolean ? testutil::random_boolean_dataset(rng, n, 2, 2)
                          : testutil::random_lattice_dataset(rng, n, 2, 2);
        auto m = boolean ? MetricSpec::hamming() : MetricSpec::l2();
        auto x =
            boolean ? testutil::random_boolean_vec(rng, n) : testutil::random_lattice_vec(rng, n);
        auto check = make_checker(ds, m, 1, x);
        FeatureSet X;
        for (size_t i = 0; i < n; ++i)
            if (rng() % 3 == 0) X.indices.push_back(i);
        X.normalize();
        auto v = check(X);
        if (!v.sufficient) {
            REQUIRE(v.counterexample.has_value());
            const Vec& z = *v.counterexample;
            for (size_t i : X.indices) CHECK(z[i] == x[i]);
            CHECK(classify_optimistic(ds, m, 1, z) != classify_optimistic(ds, m, 1, x));
        }
    }
}

TEST_CASE("minimal_sr output is sufficient and 1-minimal; minimum is no larger") {
    std::mt19937 rng(71);
    for (int t = 0; t < 40; ++t) {
        size_t n = 3 + rng() % 3;
        auto ds = testutil::random_boolean_dataset(rng, n, 2, 2);
        auto x = testutil::random_boolean_vec(rng, n);
        auto check = make_checker(ds, MetricSpec::hamming(), 1, x);
        auto minimal = minimal_sr(n, check);
        CHECK(check(minimal).sufficient);
        auto minimum = minimum_sr_exact(n, n, check);
        REQUIRE(minimum.has_value());
        CHECK(minimum->size() <= minimal.size());
    }
}

TEST_CASE("minimum_sr_exact parallel stages match serial") {
    std::mt19937 rng(73);
    for (int t = 0; t < 10; ++t) {
        size_t n = 4 + rng() % 3;
        auto ds = testutil::random_boolean_dataset(rng, n, 3, 3);
        auto x = testutil::random_boolean_vec(rng, n);
        auto check = make_checker(ds, MetricSpec::hamming(), 1, x);
        auto serial = minimum_sr_exact(n, n, check);
        ExecOptions four;
        four.threads = 4;
        auto parallel = minimum_sr_exact(n, n, check, four);
        REQUIRE(serial.has_value() == parallel.has_value());
        if (serial) CHECK(*serial == *parallel);
    }
}

TEST_CASE("unsupported settings are rejected loudly") {
    LabeledDataset ds(2, {vec({0, 0})}, {vec({4, 4})});
    CHECK_THROWS_AS(make_checker(ds, MetricSpec::l1(), 3, vec({1, 1})), UnsupportedSetting);
    CHECK_THROWS_AS(make_checker(ds, MetricSpec::lp(3), 1, vec({1, 1})), UnsupportedSetting);
    std::mt19937 rng(1);
    auto big = testutil::random_boolean_dataset(rng, 24, 2, 2);
    CHECK_THROWS_AS(check_sr_bruteforce(big, MetricSpec::hamming(), 3,
                                        testutil::random_boolean_vec(rng, 24), FeatureSet{}),
                    ResourceLimit);
}

TEST_CASE("greedy drop order must be a permutation") {
    auto ds = testutil::example_dataset();
    auto check = make_checker(ds, MetricSpec::hamming(), 1, vec({0, 0, 0}));
    CHECK_THROWS_AS(minimal_sr(3, check, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(minimal_sr(3, check, {0, 0, 1}), std::invalid_argument);
}

TEST_CASE("minimum_sr_exact refuses dimensions beyond its enumeration budget") {
    auto always = [](const FeatureSet&) { return SufficiencyVerdict{true, std::nullopt}; };
    CHECK_THROWS_AS(minimum_sr_exact(25, 3, always), ResourceLimit);
    CHECK(minimum_sr_exact(24, 0, always).has_value());  // empty set suffices here
}
