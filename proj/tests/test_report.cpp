#include "doctest.h"
#include "nnex/report.hpp"

using namespace nnex;

TEST_CASE("run reports round-trip through json") {
    RunReport r;
    r.command = {"nnex", "classify", "--k", "3"};
    r.dimension = 4;
    r.positives = 2;
    r.negatives = 5;
    r.metric = "l2";
    r.k = 3;
    r.result = {{"label", 1}, {"witness", {"1/2", "3"}}};
    r.timing_ms = 12.5;
    r.stats.cells_explored = 7;
    r.stats.sat_decisions = 99;

    auto j = r.to_json();
    CHECK(j["schema_version"] == 1);
    auto back = RunReport::from_json(j);
    CHECK(back == r);
    CHECK(back.stats.cells_explored == 7);
    CHECK(back.result["witness"][0] == "1/2");

    j["schema_version"] = 2;
    CHECK_THROWS_AS(RunReport::from_json(j), std::runtime_error);
}
