#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nnex/counterfactual.hpp"
#include "nnex/dataset.hpp"

namespace nnex {

/// Machine-readable run record, schema v1. Every command emits one;
/// the payload under "result" is command-specific, everything else is
/// shared and stable.
struct RunReport {
    static constexpr int schema_version = 1;

    std::vector<std::string> command;
    size_t dimension = 0;
    size_t positives = 0;
    size_t negatives = 0;
    std::string metric;
    int k = 1;
    nlohmann::json result = nlohmann::json::object();
    double timing_ms = 0.0;
    SolverStats stats;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["command"] = command;
        j["instance"] = {{"dimension", dimension},
                         {"positives", positives},
                         {"negatives", negatives},
                         {"metric", metric},
                         {"k", k}};
        j["result"] = result;
        j["timing_ms"] = timing_ms;
        j["stats"] = {{"cells_explored", stats.cells_explored},
                      {"qp_sweeps", stats.qp_sweeps},
                      {"sat_decisions", stats.sat_decisions},
                      {"nodes_expanded", stats.nodes_expanded}};
        return j;
    }

    static RunReport from_json(const nlohmann::json& j) {
        if (j.at("schema_version").get<int>() != schema_version)
            throw std::runtime_error("unsupported report schema version");
        RunReport r;
        r.command = j.at("command").get<std::vector<std::string>>();
        const auto& inst = j.at("instance");
        r.dimension = inst.at("dimension").get<size_t>();
        r.positives = inst.at("positives").get<size_t>();
        r.negatives = inst.at("negatives").get<size_t>();
        r.metric = inst.at("metric").get<std::string>();
        r.k = inst.at("k").get<int>();
        r.result = j.at("result");
        r.timing_ms = j.at("timing_ms").get<double>();
        const auto& st = j.at("stats");
        r.stats.cells_explored = st.at("cells_explored").get<size_t>();
        r.stats.qp_sweeps = st.at("qp_sweeps").get<size_t>();
        r.stats.sat_decisions = st.at("sat_decisions").get<size_t>();
        r.stats.nodes_expanded = st.at("nodes_expanded").get<size_t>();
        return r;
    }

    void fill_instance(const LabeledDataset& ds, const MetricSpec& m, int kk) {
        dimension = ds.dimension();
        positives = ds.positives().size();
        negatives = ds.negatives().size();
        metric = m.name();
        k = kk;
    }

    bool operator==(const RunReport& other) const {
        return to_json() == other.to_json();
    }
};

}  // namespace nnex
