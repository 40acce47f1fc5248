#pragma once

#include <algorithm>
#include <fstream>
#include <random>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnex/classify.hpp"
#include "nnex/dataset.hpp"
#include "nnex/sufficient.hpp"

namespace nnex {

// ---------------------------------------------------------------------------
// Source-problem instances.
// ---------------------------------------------------------------------------

struct Graph {
    size_t n = 0;                                // vertices 0..n-1
    std::vector<std::pair<size_t, size_t>> edges;  // normalized u < v

    Graph() = default;
    Graph(size_t vertices, std::vector<std::pair<size_t, size_t>> es) : n(vertices) {
        for (auto [u, v] : es) add_edge(u, v);
    }

    void add_edge(size_t u, size_t v) {
        if (u == v) throw std::invalid_argument("self-loop");
        if (u >= n || v >= n) throw std::invalid_argument("vertex out of range");
        auto e = std::minmax(u, v);
        std::pair<size_t, size_t> p{e.first, e.second};
        if (std::find(edges.begin(), edges.end(), p) != edges.end())
            throw std::invalid_argument("duplicate edge");
        edges.push_back(p);
    }

    size_t m() const { return edges.size(); }

    bool connected() const {
        if (n == 0) return true;
        std::vector<char> seen(n, 0);
        std::vector<size_t> stack = {0};
        seen[0] = 1;
        while (!stack.empty()) {
            size_t u = stack.back();
            stack.pop_back();
            for (auto [a, b] : edges) {
                size_t w = n;
                if (a == u) w = b;
                if (b == u) w = a;
                if (w < n && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    }
};

/// Edge-list text: one "u v" pair per line, 1-based vertex ids;
/// blank lines and '#' comments skipped. The vertex count is the
/// largest id seen.
inline Graph read_graph_edge_list(std::istream& in) {
    std::vector<std::pair<size_t, size_t>> raw;
    size_t maxv = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u >> v)) throw std::runtime_error("bad edge line: " + line);
        if (u < 1 || v < 1) throw std::runtime_error("vertex ids are 1-based: " + line);
        raw.push_back({size_t(u - 1), size_t(v - 1)});
        maxv = std::max({maxv, size_t(u), size_t(v)});
    }
    Graph g;
    g.n = maxv;
    for (auto [u, v] : raw) g.add_edge(u, v);
    return g;
}

inline Graph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return read_graph_edge_list(in);
}

struct KnapsackInstance {
    std::vector<long long> weights;
    std::vector<long long> values;
    long long capacity = 0;

    void check() const {
        if (weights.size() != values.size()) throw std::invalid_argument("length mismatch");
        if (weights.empty()) throw std::invalid_argument("no items");
        if (capacity <= 0) throw std::invalid_argument("capacity must be positive");
        for (size_t i = 0; i < weights.size(); ++i)
            if (weights[i] <= 0 || values[i] <= 0)
                throw std::invalid_argument("weights and values must be positive");
    }
};

struct BmcfInstance {
    std::vector<std::vector<int>> matrix;  // 0/1 entries, m x n
    size_t flip_budget = 0;                // column-subset size bound
    size_t slack = 0;                      // p: rows allowed to stay heavy

    size_t rows() const { return matrix.size(); }
    size_t cols() const { return matrix.empty() ? 0 : matrix[0].size(); }
};

// ---------------------------------------------------------------------------
// Brute-force oracles for the source problems.
// ---------------------------------------------------------------------------

namespace detail {
inline void check_enum_budget(size_t n) {
    if (n > 20) throw ResourceLimit("enumeration budget: 2^" + std::to_string(n) + " subsets");
}
}  // namespace detail

/// True iff some vertex set of size <= bound covers all but at most
/// uncovered_slack edges.
inline bool solve_vc_bruteforce(const Graph& g, size_t bound, size_t uncovered_slack = 0) {
    detail::check_enum_budget(g.n);
    for (size_t mask = 0; mask < (size_t(1) << g.n); ++mask) {
        if (size_t(__builtin_popcountll(mask)) > bound) continue;
        size_t uncovered = 0;
        for (auto [u, v] : g.edges)
            if (!((mask >> u) & 1) && !((mask >> v) & 1)) ++uncovered;
        if (uncovered <= uncovered_slack) return true;
    }
    return false;
}

inline size_t min_vertex_cover_size(const Graph& g, size_t uncovered_slack = 0) {
    for (size_t b = 0; b <= g.n; ++b)
        if (solve_vc_bruteforce(g, b, uncovered_slack)) return b;
    return g.n;
}

/// Half-total-value knapsack decision: can items of weight <= capacity
/// reach at least half the total value?
inline bool solve_knapsack_bruteforce(const KnapsackInstance& ki) {
    ki.check();
    detail::check_enum_budget(ki.weights.size());
    long long total = 0;
    for (long long v : ki.values) total += v;
    const size_t n = ki.weights.size();
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        long long w = 0, v = 0;
        for (size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1) {
                w += ki.weights[i];
                v += ki.values[i];
            }
        if (w <= ki.capacity && 2 * v >= total) return true;
    }
    return false;
}

/// p-BMCF decision: is there a column set T, |T| <= budget, whose
/// flipping leaves at most `slack` rows of weight >= |T|? (At least
/// rows - slack rows must reach weight <= |T| - 1.)
inline bool solve_bmcf_bruteforce(const BmcfInstance& bi) {
    detail::check_enum_budget(bi.cols());
    const size_t m = bi.rows(), n = bi.cols();
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        size_t tsize = size_t(__builtin_popcountll(mask));
        if (tsize > bi.flip_budget) continue;
        size_t light = 0;
        for (size_t r = 0; r < m; ++r) {
            size_t weight = 0;
            for (size_t cidx = 0; cidx < n; ++cidx)
                weight += size_t(bi.matrix[r][cidx] ^ int((mask >> cidx) & 1));
            if (tsize >= 1 && weight <= tsize - 1) ++light;
        }
        if (light + bi.slack >= m) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Generated explanation instances with embedded ground truth.
// ---------------------------------------------------------------------------

struct GeneratedInstance {
    std::string family;
    LabeledDataset dataset{1, {}, {}};
    MetricSpec metric;
    int k = 1;
    Vec x;
    Rational budget{0};
    Label expected_label = Label::negative;  // classification of x, re-verified

    // ground truth, depending on the family
    std::optional<size_t> min_sr_size;
    std::optional<bool> cf_exists;
    std::optional<bool> empty_set_sufficient;
    nlohmann::json source;

    void verify_label() const {
        if (classify_optimistic(dataset, metric, k, x) != expected_label)
            throw std::logic_error("generated instance fails its label assertion");
    }
};

/// Vertex-cover instance for minimum sufficient reasons over (R, lp).
/// One epsilon level per |A|-slot, fixed to eps_h = 1/(2(h+1)); the
/// negatives put 1+eps on an edge's endpoints, the positives lower one
/// endpoint to eps. The minimum sufficient reason of the origin has
/// exactly the minimum vertex cover size.
inline GeneratedInstance gen_vc_minsr_continuous(const Graph& g, int k, int p) {
    require_odd_k(k);
    if (p < 1) throw std::invalid_argument("p >= 1");
    if (g.m() == 0) throw std::invalid_argument("graph needs at least one edge");
    const size_t levels = size_t((k + 1) / 2);
    if (2 * g.m() < levels)
        throw std::invalid_argument("graph too small to seat the positive certificate");

    std::vector<Vec> pos, neg;
    for (size_t j = 0; j < g.m(); ++j) {
        auto [u, v] = g.edges[j];
        for (size_t h = 1; h <= levels; ++h) {
            Rational eps(1, 2 * (static_cast<long long>(h) + 1));
            Vec base(g.n, Rational(0));
            base[u] = Rational(1) + eps;
            base[v] = Rational(1) + eps;
            neg.push_back(base);
            Vec drop_first = base, drop_second = base;
            drop_first[u] = eps;
            drop_second[v] = eps;
            pos.push_back(std::move(drop_first));
            pos.push_back(std::move(drop_second));
        }
    }

    GeneratedInstance inst;
    inst.family = "vc-minsr-cont";
    inst.dataset = LabeledDataset(g.n, std::move(pos), std::move(neg));
    inst.metric = MetricSpec::lp(p);
    inst.k = k;
    inst.x = Vec(g.n, Rational(0));
    inst.expected_label = Label::positive;
    inst.min_sr_size = min_vertex_cover_size(g);
    inst.budget = Rational(static_cast<long long>(*inst.min_sr_size));
    inst.source = {{"vertices", g.n}, {"edges", g.edges}, {"min_vertex_cover", *inst.min_sr_size}};
    inst.verify_label();
    return inst;
}

/// Discrete k=1 variant: negatives are edge incidence vectors, each
/// positive drops one endpoint bit.
inline GeneratedInstance gen_vc_minsr_discrete(const Graph& g) {
    if (g.m() == 0) throw std::invalid_argument("graph needs at least one edge");
    std::vector<Vec> pos, neg;
    auto push_unique = [](std::vector<Vec>& vs, Vec v) {
        if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(std::move(v));
    };
    for (auto [u, v] : g.edges) {
        Vec base(g.n, Rational(0));
        base[u] = Rational(1);
        base[v] = Rational(1);
        Vec drop_first = base, drop_second = base;
        drop_first[u] = Rational(0);
        drop_second[v] = Rational(0);
        neg.push_back(std::move(base));
        push_unique(pos, std::move(drop_first));
        push_unique(pos, std::move(drop_second));
    }

    GeneratedInstance inst;
    inst.family = "vc-minsr-disc";
    inst.dataset = LabeledDataset(g.n, std::move(pos), std::move(neg));
    inst.metric = MetricSpec::hamming();
    inst.k = 1;
    inst.x = Vec(g.n, Rational(0));
    inst.expected_label = Label::positive;
    inst.min_sr_size = min_vertex_cover_size(g);
    inst.budget = Rational(static_cast<long long>(*inst.min_sr_size));
    inst.source = {{"vertices", g.n}, {"edges", g.edges}, {"min_vertex_cover", *inst.min_sr_size}};
    inst.verify_label();
    return inst;
}

/// Half-value knapsack to l1 counterfactual, k = 1: g holds the
/// weights, h backs off by gamma * value with gamma = 1/(2 max v); a
/// counterfactual for the origin within budget W exists iff the
/// knapsack instance is a yes.
inline GeneratedInstance gen_knapsack_cf_l1(const KnapsackInstance& ki) {
    ki.check();
    const size_t n = ki.weights.size();
    long long maxv = *std::max_element(ki.values.begin(), ki.values.end());
    Rational gamma(1, 2 * maxv);

    Vec gvec(n), hvec(n);
    for (size_t i = 0; i < n; ++i) {
        gvec[i] = Rational(ki.weights[i]);
        hvec[i] = Rational(ki.weights[i]) - gamma * Rational(ki.values[i]);
    }

    GeneratedInstance inst;
    inst.family = "knapsack-l1";
    inst.dataset = LabeledDataset(n, {gvec}, {hvec});
    inst.metric = MetricSpec::l1();
    inst.k = 1;
    inst.x = Vec(n, Rational(0));
    inst.budget = Rational(ki.capacity);
    inst.expected_label = Label::negative;
    inst.cf_exists = solve_knapsack_bruteforce(ki);
    inst.source = {{"weights", ki.weights}, {"values", ki.values}, {"capacity", ki.capacity}};
    inst.verify_label();
    return inst;
}

/// Lifts a k=1 l1 instance to odd k >= 3: (k-1)/2 padding points per
/// class on the first axis, plus one coordinate pushing the original
/// pair out to M = 10 (budget + k). Inside the budget ball the padding
/// splits evenly, so the answer is unchanged.
inline GeneratedInstance lift_cf_l1_to_k(const GeneratedInstance& inst, int k) {
    require_odd_k(k);
    if (k < 3) throw std::invalid_argument("lift targets k >= 3");
    if (inst.family != "knapsack-l1") throw std::invalid_argument("lift expects a knapsack-l1 instance");
    const size_t n = inst.dataset.dimension();
    Rational big = Rational(10) * (inst.budget + Rational(k));

    auto widen = [&](const Vec& v, const Rational& tail) {
        Vec w = v;
        w.push_back(tail);
        return w;
    };
    std::vector<Vec> pos, neg;
    for (const auto& v : inst.dataset.positives()) pos.push_back(widen(v, big));
    for (const auto& v : inst.dataset.negatives()) neg.push_back(widen(v, big));
    for (long long t = 1; t <= (k - 1) / 2; ++t) {
        Vec pad(n, Rational(0));
        pad[0] = Rational(t);
        pos.push_back(widen(pad, Rational(0)));
    }
    for (long long t = (k + 1) / 2; t <= k - 1; ++t) {
        Vec pad(n, Rational(0));
        pad[0] = Rational(t);
        neg.push_back(widen(pad, Rational(0)));
    }

    GeneratedInstance out;
    out.family = "knapsack-l1-lifted";
    out.dataset = LabeledDataset(n + 1, std::move(pos), std::move(neg));
    out.metric = MetricSpec::l1();
    out.k = k;
    out.x = widen(inst.x, Rational(0));
    out.budget = inst.budget;
    out.expected_label = inst.expected_label;
    out.cf_exists = inst.cf_exists;
    out.source = inst.source;
    out.source["lifted_k"] = k;
    out.source["pad_coordinate"] = to_string(big);
    out.verify_label();
    return out;
}

/// Vertex cover (cover all but `slack` edges with <= bound vertices)
/// to p-BMCF: the transposed incidence matrix gains an all-ones column
/// and the budget grows by one.
inline BmcfInstance gen_vc_to_bmcf(const Graph& g, size_t bound, size_t slack = 0) {
    if (g.m() < slack + 1) throw std::invalid_argument("graph needs at least p+1 edges");
    BmcfInstance bi;
    bi.flip_budget = bound + 1;
    bi.slack = slack;
    for (auto [u, v] : g.edges) {
        std::vector<int> row(g.n + 1, 0);
        row[u] = 1;
        row[v] = 1;
        row[g.n] = 1;
        bi.matrix.push_back(std::move(row));
    }
    return bi;
}

/// p-BMCF to the discrete counterfactual problem at k = 2p+1: matrix
/// rows (padded with p+1 zeros) are the positives, the p+1 appended
/// unit vectors the negatives, and the all-ones query flips within the
/// budget iff the BMCF instance is a yes.
inline GeneratedInstance gen_bmcf_cf_hamming(const BmcfInstance& bi) {
    const size_t m = bi.rows(), n = bi.cols(), p = bi.slack;
    if (m == 0 || n == 0) throw std::invalid_argument("empty matrix");
    for (const auto& row : bi.matrix) {
        if (row.size() != n) throw std::invalid_argument("ragged matrix");
        if (std::count(row.begin(), row.end(), 0) < 2)
            throw std::invalid_argument("every row needs at least two zeros");
    }
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j)
            if (bi.matrix[i] == bi.matrix[j]) throw std::invalid_argument("repeated rows");
    if (m < p + 1) throw std::invalid_argument("need at least p+1 rows");

    std::vector<Vec> pos, neg;
    for (const auto& row : bi.matrix) {
        Vec v(n + p + 1, Rational(0));
        for (size_t i = 0; i < n; ++i) v[i] = Rational(row[i]);
        pos.push_back(std::move(v));
    }
    for (size_t j = 0; j < p + 1; ++j) {
        Vec v(n + p + 1, Rational(0));
        v[n + j] = Rational(1);
        neg.push_back(std::move(v));
    }

    GeneratedInstance inst;
    inst.family = "bmcf";
    inst.dataset = LabeledDataset(n + p + 1, std::move(pos), std::move(neg));
    inst.metric = MetricSpec::hamming();
    inst.k = int(2 * p + 1);
    inst.x = Vec(n + p + 1, Rational(1));
    inst.budget = Rational(static_cast<long long>(bi.flip_budget));
    inst.expected_label = Label::positive;
    inst.cf_exists = solve_bmcf_bruteforce(bi);
    inst.source = {{"matrix", bi.matrix}, {"flip_budget", bi.flip_budget}, {"slack", bi.slack}};
    inst.verify_label();
    return inst;
}

/// Half-size vertex cover to k >= 3 check-SR over Hamming: the empty
/// set fails to be a sufficient reason for the all-zeros query iff the
/// graph has a cover of all but (k-1)/2 edges using at most n/2
/// vertices.
inline GeneratedInstance gen_check_sr_k3_discrete(const Graph& g, int k) {
    require_odd_k(k);
    if (k < 3) throw std::invalid_argument("construction needs k >= 3");
    const size_t c = size_t((k - 1) / 2);
    if (g.n % 2 != 0 || g.n <= 2 * (c + 1))
        throw std::invalid_argument("need an even vertex count n > 2(c+1)");
    if (!g.connected()) throw std::invalid_argument("graph must be connected");
    const size_t dim = g.n + c;

    std::vector<Vec> pos, neg;
    for (auto [u, v] : g.edges) {
        Vec w(dim, Rational(0));
        w[u] = Rational(1);
        w[v] = Rational(1);
        w[g.n] = Rational(1);  // alpha_1
        neg.push_back(std::move(w));
    }
    {
        Vec w(dim, Rational(0));
        w[g.n] = Rational(1);  // zeros + alpha_1
        pos.push_back(std::move(w));
    }
    for (size_t h = 0; h < c; ++h) {
        Vec w(dim, Rational(0));
        for (size_t i = 0; i < g.n; ++i) w[i] = Rational(1);
        w[g.n + h] = Rational(1);  // ones + alpha_h
        pos.push_back(std::move(w));
    }

    GeneratedInstance inst;
    inst.family = "checksr-k3";
    inst.dataset = LabeledDataset(dim, std::move(pos), std::move(neg));
    inst.metric = MetricSpec::hamming();
    inst.k = k;
    inst.x = Vec(dim, Rational(0));
    inst.expected_label = Label::negative;

    bool cover_exists = false;  // <= n/2 vertices covering all but c edges
    for (size_t mask = 0; mask < (size_t(1) << g.n) && !cover_exists; ++mask) {
        if (size_t(__builtin_popcountll(mask)) > g.n / 2) continue;
        size_t uncovered = 0;
        for (auto [u, v] : g.edges)
            if (!((mask >> u) & 1) && !((mask >> v) & 1)) ++uncovered;
        cover_exists = uncovered <= c;
    }
    inst.empty_set_sufficient = !cover_exists;
    inst.source = {{"vertices", g.n}, {"edges", g.edges}, {"half_cover_exists", cover_exists}};
    inst.verify_label();
    return inst;
}

// ---------------------------------------------------------------------------
// Serialization: dataset CSV + JSON sidecar with ground truth.
// ---------------------------------------------------------------------------

inline nlohmann::json instance_sidecar(const GeneratedInstance& inst) {
    nlohmann::json j;
    j["family"] = inst.family;
    j["metric"] = inst.metric.name();
    j["k"] = inst.k;
    std::vector<std::string> xs;
    for (const auto& r : inst.x) xs.push_back(to_string(r));
    j["x"] = xs;
    j["budget"] = to_string(inst.budget);
    j["expected_label"] = label_value(inst.expected_label);
    nlohmann::json gt;
    if (inst.min_sr_size) gt["min_sr_size"] = *inst.min_sr_size;
    if (inst.cf_exists) gt["cf_exists"] = *inst.cf_exists;
    if (inst.empty_set_sufficient) gt["empty_set_sufficient"] = *inst.empty_set_sufficient;
    j["ground_truth"] = gt;
    j["source"] = inst.source;
    return j;
}

inline void write_instance(const GeneratedInstance& inst, const std::string& prefix) {
    {
        std::ofstream csv(prefix + ".csv");
        if (!csv) throw std::runtime_error("cannot write " + prefix + ".csv");
        write_dataset_csv(csv, inst.dataset);
    }
    std::ofstream js(prefix + ".json");
    if (!js) throw std::runtime_error("cannot write " + prefix + ".json");
    js << instance_sidecar(inst).dump(2) << '\n';
}

/// Loads a generated instance and re-verifies its label assertion.
inline GeneratedInstance load_instance(const std::string& prefix) {
    GeneratedInstance inst;
    inst.dataset = read_dataset_csv_file(prefix + ".csv");
    std::ifstream js(prefix + ".json");
    if (!js) throw std::runtime_error("cannot open " + prefix + ".json");
    nlohmann::json j;
    js >> j;
    inst.family = j.at("family").get<std::string>();
    inst.metric = MetricSpec::parse(j.at("metric").get<std::string>());
    inst.k = j.at("k").get<int>();
    for (const auto& s : j.at("x")) inst.x.push_back(parse_rational(s.get<std::string>()));
    inst.budget = parse_rational(j.at("budget").get<std::string>());
    inst.expected_label = label_from(j.at("expected_label").get<int>());
    const auto& gt = j.at("ground_truth");
    if (gt.contains("min_sr_size")) inst.min_sr_size = gt["min_sr_size"].get<size_t>();
    if (gt.contains("cf_exists")) inst.cf_exists = gt["cf_exists"].get<bool>();
    if (gt.contains("empty_set_sufficient"))
        inst.empty_set_sufficient = gt["empty_set_sufficient"].get<bool>();
    if (j.contains("source")) inst.source = j["source"];
    inst.verify_label();
    return inst;
}

// A handful of named graphs used across tests.
inline Graph graph_k2() { return Graph(2, {{0, 1}}); }
inline Graph graph_p3() { return Graph(3, {{0, 1}, {1, 2}}); }
inline Graph graph_k3() { return Graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
inline Graph graph_star4() { return Graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}); }
inline Graph graph_c5() { return Graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}); }

/// Erdos-Renyi corpus helper (deterministic for a fixed seed).
inline Graph gen_er_graph(size_t n, double edge_prob, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    Graph g;
    g.n = n;
    for (size_t u = 0; u < n; ++u)
        for (size_t v = u + 1; v < n; ++v)
            if (coin(rng) < edge_prob) g.add_edge(u, v);
    return g;
}

}  // namespace nnex
