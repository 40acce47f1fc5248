#include "doctest.h"
#include "helpers.hpp"
#include "nnex/mip.hpp"

using namespace nnex;
using testutil::vec;

TEST_CASE("mip emission golden file for the two-point dataset") {
    LabeledDataset ds(2, {vec({1, 0})}, {vec({0, 1})});
    std::string text = emit_mip_cf_discrete(ds, vec({1, 0}));
    // Frozen after checking every constraint by hand against the
    // indicator linearization of the two class minima.
    const std::string expected =
        "\\ closest counterfactual for a 1-nn classifier over {0,1}^2\n"
        "\\ query classified positive; hamming distance to the query = objective + 1\n"
        "Minimize\n"
        " obj: - y1 + y2\n"
        "Subject To\n"
        " dp_le_1: dp + y1 - y2 <= 1\n"
        " vp_min_1: 1 vp1 [ - vp1 * y1 + vp1 * y2 ] - dp <= 0\n"
        " pick_vp: vp1 = 1\n"
        " dm_le_1: dm - y1 + y2 <= 1\n"
        " vm_min_1: 1 vm1 [ vm1 * y1 - vm1 * y2 ] - dm <= 0\n"
        " pick_vm: vm1 = 1\n"
        " flip: dm - dp <= -1\n"
        "Bounds\n"
        " dp >= 0\n"
        " dm >= 0\n"
        "Binaries\n"
        " y1 y2 vp1 vm1\n"
        "Generals\n"
        " dp dm\n"
        "End\n";
    CHECK(text == expected);
}

TEST_CASE("mip emission is deterministic and counts one indicator per point") {
    std::mt19937 rng(301);
    auto ds = testutil::random_boolean_dataset(rng, 5, 3, 4);
    auto x = testutil::random_boolean_vec(rng, 5);
    auto a = emit_mip_cf_discrete(ds, x);
    auto b = emit_mip_cf_discrete(ds, x);
    CHECK(a == b);
    size_t count = 0;
    for (size_t pos = a.find("_min_"); pos != std::string::npos; pos = a.find("_min_", pos + 1))
        ++count;
    CHECK(count == 3 + 4);
}

TEST_CASE("mip emission flips the inequality for a negative query") {
    LabeledDataset ds(2, {vec({1, 1})}, {vec({0, 0})});
    auto text = emit_mip_cf_discrete(ds, vec({0, 0}));
    CHECK(text.find("flip: dp - dm <= 0") != std::string::npos);
    CHECK(text.find("classified negative") != std::string::npos);
}

TEST_CASE("mip emission rejects non-boolean input") {
    LabeledDataset ds(1, {Vec{rat(1, 2)}}, {Vec{rat(2)}});
    CHECK_THROWS_AS(emit_mip_cf_discrete(ds, Vec{rat(0)}), std::invalid_argument);
}
