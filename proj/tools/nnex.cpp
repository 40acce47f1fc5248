// Command-line surface for nearest-neighbor explanation queries:
// classification, counterfactuals, sufficient reasons, solver-input
// emission, and hardness-construction instance generation.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nnex/classify.hpp"
#include "nnex/counterfactual.hpp"
#include "nnex/dataset.hpp"
#include "nnex/mip.hpp"
#include "nnex/report.hpp"
#include "nnex/reductions.hpp"
#include "nnex/sat.hpp"
#include "nnex/sufficient.hpp"

namespace {

using namespace nnex;
using nlohmann::json;

constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitError = 2;
constexpr int kExitUnsupported = 3;

struct CommonArgs {
    std::string dataset_path;
    std::string metric_name = "hamming";
    int k = 1;
    std::string x_text;
    std::string out_path;
    std::string format = "json";
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--dataset", args.dataset_path,
                    "training data CSV (features, then a 0/1 label)")
        ->required();
    cmd->add_option("--metric", args.metric_name, "hamming, l1, l2 or lp:<p>");
    cmd->add_option("--k", args.k, "odd neighborhood size");
    cmd->add_option("--x", args.x_text, "query vector: inline '1,0.5,...' or a CSV file path")
        ->required();
    cmd->add_option("--out", args.out_path, "write the JSON report here as well");
    cmd->add_option("--format", args.format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
    cmd->add_option("--threads", args.threads, "worker cap for parallel paths")
        ->check(CLI::PositiveNumber);
}

Vec parse_query(const std::string& text, size_t dim) {
    Vec x = std::filesystem::exists(text) ? read_vector_csv_file(text) : parse_vector(text);
    if (x.size() != dim)
        throw std::runtime_error("query has " + std::to_string(x.size()) +
                                 " coordinates, dataset dimension is " + std::to_string(dim));
    return x;
}

std::vector<long long> parse_int_list(const std::string& text) {
    std::vector<long long> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stoll(cell));
    return out;
}

// 1-based on the command line, 0-based inside.
std::vector<size_t> parse_feature_list(const std::string& text, size_t dim) {
    std::vector<size_t> out;
    for (long long v : parse_int_list(text)) {
        if (v < 1 || size_t(v) > dim)
            throw std::runtime_error("feature index out of range: " + std::to_string(v));
        out.push_back(size_t(v) - 1);
    }
    return out;
}

json one_based(const FeatureSet& X) {
    json a = json::array();
    for (size_t i : X.indices) a.push_back(i + 1);
    return a;
}

json vector_json(const Vec& v) {
    json a = json::array();
    for (const auto& r : v) a.push_back(to_string(r));
    return a;
}

void emit_report(const RunReport& report, const CommonArgs& args) {
    if (args.format == "json") {
        std::cout << report.to_json().dump(2) << '\n';
    } else {
        std::cout << "instance: n=" << report.dimension << " |S+|=" << report.positives
                  << " |S-|=" << report.negatives << " metric=" << report.metric
                  << " k=" << report.k << '\n';
        std::cout << "result: " << report.result.dump() << '\n';
        std::cout << "timing_ms: " << report.timing_ms << '\n';
    }
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw std::runtime_error("cannot write " + args.out_path);
        out << report.to_json().dump(2) << '\n';
    }
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

RunReport base_report(const std::vector<std::string>& echo, const LabeledDataset& ds,
                      const MetricSpec& m, int k) {
    RunReport r;
    r.command = echo;
    r.fill_instance(ds, m, k);
    return r;
}

int run_classify(const CommonArgs& args, const std::vector<std::string>& echo) {
    auto ds = read_dataset_csv_file(args.dataset_path);
    auto metric = MetricSpec::parse(args.metric_name);
    Vec x = parse_query(args.x_text, ds.dimension());
    Timer timer;
    auto label = classify_optimistic(ds, metric, args.k, x);
    auto prof = neighbor_profile(ds, metric, args.k, x);
    RunReport report = base_report(echo, ds, metric, args.k);
    report.result["label"] = label_value(label);
    report.result["threshold_powered"] = to_string(prof.threshold);
    report.result["positives_below"] = prof.positives_below;
    report.result["positives_at_threshold"] = prof.positives_at;
    report.result["free_slots"] = prof.free_slots;
    json neigh = json::array();
    for (const auto& e : prof.entries)
        neigh.push_back({{"distance_powered", to_string(e.dist)}, {"label", label_value(e.label)}});
    report.result["profile"] = neigh;
    report.timing_ms = timer.ms();
    emit_report(report, args);
    return kExitYes;
}

int run_counterfactual(const CommonArgs& args, std::string engine, const std::string& budget_text,
                       const std::string& solver_cmd, const std::vector<std::string>& echo) {
    auto ds = read_dataset_csv_file(args.dataset_path);
    auto metric = MetricSpec::parse(args.metric_name);
    Vec x = parse_query(args.x_text, ds.dimension());
    Rational budget = parse_rational(budget_text);

    if (engine == "auto") {
        if (metric.is_lp(2))
            engine = "qp";
        else if (metric.is_hamming())
            engine = (ds.dimension() <= 20 || args.k > 1) ? "exact" : "sat";
        else if (metric.is_lp(1))
            engine = "l1-oracle";
        else
            throw UnsupportedSetting("no counterfactual engine for metric " + metric.name());
    }
    if (engine == "qp" && !metric.is_lp(2))
        throw std::runtime_error("engine qp needs the l2 metric");
    if ((engine == "exact" || engine == "sat") && !metric.is_hamming())
        throw std::runtime_error("engine " + engine + " needs the hamming metric");
    if (engine == "sat" && args.k != 1) throw std::runtime_error("engine sat supports k = 1 only");
    if (engine == "l1-oracle" && !metric.is_lp(1))
        throw std::runtime_error("engine l1-oracle needs the l1 metric");

    Timer timer;
    RunReport report = base_report(echo, ds, metric, args.k);
    SolverStats stats;
    CounterfactualResult res;
    if (engine == "qp") {
        CfL2Options opt;
        opt.threads = args.threads;
        res = cf_l2(ds, args.k, x, budget, &stats, opt);
    } else if (engine == "exact") {
        CfHammingOptions opt;
        opt.threads = args.threads;
        res = cf_hamming_exact(ds, args.k, x, budget, &stats, opt);
    } else if (engine == "sat") {
        auto backend =
            solver_cmd.empty() ? SatBackend::internal() : SatBackend::external(solver_cmd);
        res = sat_solve_cf_1nn(ds, x, budget, backend, &stats);
    } else if (engine == "l1-oracle") {
        res = cf_l1_oracle(ds, args.k, x, budget, &stats);
    } else {
        throw std::runtime_error("unknown engine: " + engine);
    }

    report.result["engine"] = engine;
    report.result["budget"] = to_string(budget);
    report.result["exists"] = res.exists();
    report.result["indeterminate"] = res.status == CounterfactualResult::Status::indeterminate;
    if (res.exists()) {
        report.result["witness"] = vector_json(*res.witness);
        report.result["distance_powered"] = to_string(*res.achieved_powered);
        report.result["distance"] = res.achieved(metric);
        report.result["provenance"] = res.provenance;
        if (!res.flip_set.empty()) {
            json flips = json::array();
            for (size_t i : res.flip_set) flips.push_back(i + 1);
            report.result["flips"] = flips;
        }
    }
    report.timing_ms = timer.ms();
    report.stats = stats;
    emit_report(report, args);
    return res.exists() ? kExitYes : kExitNo;
}

int run_check_sr(const CommonArgs& args, const std::string& features,
                 const std::vector<std::string>& echo) {
    auto ds = read_dataset_csv_file(args.dataset_path);
    auto metric = MetricSpec::parse(args.metric_name);
    Vec x = parse_query(args.x_text, ds.dimension());
    FeatureSet X(parse_feature_list(features, ds.dimension()));
    Timer timer;
    auto check = make_checker(ds, metric, args.k, x);
    auto verdict = check(X);
    RunReport report = base_report(echo, ds, metric, args.k);
    report.result["features"] = one_based(X);
    report.result["sufficient"] = verdict.sufficient;
    if (verdict.counterexample)
        report.result["counterexample"] = vector_json(*verdict.counterexample);
    report.timing_ms = timer.ms();
    emit_report(report, args);
    return verdict.sufficient ? kExitYes : kExitNo;
}

int run_minimal_sr(const CommonArgs& args, const std::string& order_text,
                   const std::vector<std::string>& echo) {
    auto ds = read_dataset_csv_file(args.dataset_path);
    auto metric = MetricSpec::parse(args.metric_name);
    Vec x = parse_query(args.x_text, ds.dimension());
    std::vector<size_t> order = parse_feature_list(order_text, ds.dimension());
    Timer timer;
    auto check = make_checker(ds, metric, args.k, x);
    auto X = minimal_sr(ds.dimension(), check, order);
    RunReport report = base_report(echo, ds, metric, args.k);
    report.result["minimal_sufficient_reason"] = one_based(X);
    report.result["size"] = X.size();
    report.timing_ms = timer.ms();
    emit_report(report, args);
    return kExitYes;
}

int run_minimum_sr(const CommonArgs& args, long bound, const std::vector<std::string>& echo) {
    auto ds = read_dataset_csv_file(args.dataset_path);
    auto metric = MetricSpec::parse(args.metric_name);
    Vec x = parse_query(args.x_text, ds.dimension());
    if (bound < 0) throw std::runtime_error("budget must be nonnegative");
    Timer timer;
    auto check = make_checker(ds, metric, args.k, x);
    ExecOptions exec;
    exec.threads = args.threads;
    auto X = minimum_sr_exact(ds.dimension(), size_t(bound), check, exec);
    RunReport report = base_report(echo, ds, metric, args.k);
    report.result["bound"] = bound;
    report.result["found"] = X.has_value();
    if (X) {
        report.result["minimum_sufficient_reason"] = one_based(*X);
        report.result["size"] = X->size();
    }
    report.timing_ms = timer.ms();
    emit_report(report, args);
    return X ? kExitYes : kExitNo;
}

int run_encode(const CommonArgs& args, const std::string& target, const std::string& budget_text,
               const std::vector<std::string>& echo) {
    auto ds = read_dataset_csv_file(args.dataset_path);
    Vec x = parse_query(args.x_text, ds.dimension());
    if (args.out_path.empty()) throw std::runtime_error("encode needs --out");
    Timer timer;
    RunReport report = base_report(echo, ds, MetricSpec::hamming(), 1);

    std::ofstream out(args.out_path);
    if (!out) throw std::runtime_error("cannot write " + args.out_path);
    if (target == "mip") {
        out << emit_mip_cf_discrete(ds, x);
        report.result["target"] = "mip";
    } else {
        int budget = budget_text.empty() ? int(ds.dimension()) : std::stoi(budget_text);
        CnfFormula f = sat_encode_cf_1nn(ds, x, budget);
        if (target == "cnf")
            write_dimacs(out, f);
        else
            write_knf(out, f);
        report.result["target"] = target;
        report.result["budget"] = budget;
        report.result["variables"] = f.num_vars;
        report.result["guarded_cards"] = f.cards.size();
        report.result["variable_map"] = {
            {"y", {{"first", 1}, {"last", ds.dimension()}}},
            {"guards", {{"first", ds.dimension() + 1}, {"last", size_t(f.num_vars)}}}};
        std::cerr << "variables: y = 1.." << ds.dimension() << ", guards = " << ds.dimension() + 1
                  << ".." << f.num_vars << "\n";
    }
    report.result["out"] = args.out_path;
    report.timing_ms = timer.ms();
    CommonArgs print_args = args;
    print_args.out_path.clear();  // --out already holds the artifact
    emit_report(report, print_args);
    return kExitYes;
}

int run_gen(const std::string& family, const std::string& graph_path, int k, int p,
            const std::string& w_text, const std::string& v_text, long long W, long long l,
            int slack, const std::string& out_prefix) {
    if (out_prefix.empty()) throw std::runtime_error("gen needs --out prefix");
    GeneratedInstance inst;
    if (family == "knapsack-l1") {
        KnapsackInstance ki;
        ki.weights = parse_int_list(w_text);
        ki.values = parse_int_list(v_text);
        ki.capacity = W;
        inst = gen_knapsack_cf_l1(ki);
        if (k >= 3) inst = lift_cf_l1_to_k(inst, k);
    } else {
        if (graph_path.empty()) throw std::runtime_error("family " + family + " needs --graph");
        Graph g = read_graph_file(graph_path);
        if (family == "vc-minsr-cont")
            inst = gen_vc_minsr_continuous(g, k, p);
        else if (family == "vc-minsr-disc")
            inst = gen_vc_minsr_discrete(g);
        else if (family == "checksr-k3")
            inst = gen_check_sr_k3_discrete(g, k);
        else if (family == "bmcf")
            inst = gen_bmcf_cf_hamming(gen_vc_to_bmcf(g, size_t(l), size_t(slack)));
        else
            throw std::runtime_error("unknown family: " + family);
    }
    write_instance(inst, out_prefix);
    load_instance(out_prefix);  // re-verifies the embedded label assertion
    std::cout << instance_sidecar(inst).dump(2) << '\n';
    return kExitYes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"explanations for k-nearest-neighbor classifiers"};
    app.require_subcommand(1);

    std::vector<std::string> echo(argv, argv + argc);

    CommonArgs classify_args;
    auto* cmd_classify = app.add_subcommand("classify", "optimistic k-NN label of a query");
    add_common(cmd_classify, classify_args);

    CommonArgs cf_args;
    std::string cf_engine = "auto", cf_budget, cf_solver;
    auto* cmd_cf = app.add_subcommand("counterfactual", "closest label-flipping point");
    add_common(cmd_cf, cf_args);
    cmd_cf->add_option("--budget", cf_budget, "distance bound (exact rational or decimal)")
        ->required();
    cmd_cf->add_option("--engine", cf_engine, "auto, qp, exact, sat or l1-oracle");
    cmd_cf->add_option("--sat-solver", cf_solver,
                       "external command for --engine sat (gets a DIMACS path, answers s/v lines)");

    CommonArgs check_args;
    std::string check_features;
    auto* cmd_check = app.add_subcommand("check-sr", "is a feature set a sufficient reason");
    add_common(cmd_check, check_args);
    cmd_check->add_option("--features", check_features, "1-based feature indices, e.g. 1,3");

    CommonArgs minimal_args;
    std::string minimal_order;
    auto* cmd_minimal = app.add_subcommand("minimal-sr", "greedy minimal sufficient reason");
    add_common(cmd_minimal, minimal_args);
    cmd_minimal->add_option("--order", minimal_order,
                            "drop order as 1-based indices (default: descending)");

    CommonArgs minimum_args;
    long minimum_budget = 0;
    auto* cmd_minimum =
        app.add_subcommand("minimum-sr", "smallest sufficient reason up to a bound");
    add_common(cmd_minimum, minimum_args);
    cmd_minimum->add_option("--budget", minimum_budget, "size bound")->required();

    CommonArgs encode_args;
    std::string encode_target = "cnf", encode_budget;
    auto* cmd_encode = app.add_subcommand("encode", "emit solver input (cnf, knf or mip)");
    add_common(cmd_encode, encode_args);
    cmd_encode->add_option("--target", encode_target, "cnf, knf or mip")
        ->check(CLI::IsMember({"cnf", "knf", "mip"}));
    cmd_encode->add_option("--budget", encode_budget, "hamming budget for cnf/knf");

    std::string gen_family, gen_graph, gen_w, gen_v, gen_out;
    int gen_k = 1, gen_p = 2, gen_slack = 0;
    long long gen_W = 1, gen_l = 1;
    auto* cmd_gen = app.add_subcommand("gen", "generate oracle-backed instances");
    cmd_gen->add_option("--family", gen_family,
                        "vc-minsr-cont, vc-minsr-disc, knapsack-l1, bmcf or checksr-k3")
        ->required();
    cmd_gen->add_option("--graph", gen_graph, "edge-list file (1-based 'u v' lines)");
    cmd_gen->add_option("--k", gen_k, "neighborhood size (odd)");
    cmd_gen->add_option("--p", gen_p, "lp exponent for vc-minsr-cont");
    cmd_gen->add_option("--w", gen_w, "knapsack weights, comma separated");
    cmd_gen->add_option("--v", gen_v, "knapsack values, comma separated");
    cmd_gen->add_option("--W", gen_W, "knapsack capacity");
    cmd_gen->add_option("--l", gen_l, "cover / flip budget for bmcf");
    cmd_gen->add_option("--slack", gen_slack, "p-BMCF slack (uncovered edges allowed)");
    cmd_gen->add_option("--out", gen_out, "output prefix (.csv and .json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (cmd_classify->parsed()) return run_classify(classify_args, echo);
        if (cmd_cf->parsed())
            return run_counterfactual(cf_args, cf_engine, cf_budget, cf_solver, echo);
        if (cmd_check->parsed()) return run_check_sr(check_args, check_features, echo);
        if (cmd_minimal->parsed()) return run_minimal_sr(minimal_args, minimal_order, echo);
        if (cmd_minimum->parsed()) return run_minimum_sr(minimum_args, minimum_budget, echo);
        if (cmd_encode->parsed())
            return run_encode(encode_args, encode_target, encode_budget, echo);
        if (cmd_gen->parsed())
            return run_gen(gen_family, gen_graph, gen_k, gen_p, gen_w, gen_v, gen_W, gen_l,
                           gen_slack, gen_out);
    } catch (const UnsupportedSetting& e) {
        std::cerr << "unsupported (open problem): " << e.what() << '\n';
        return kExitUnsupported;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
