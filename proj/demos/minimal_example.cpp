// Smallest useful tour of the library: build a dataset, classify, ask
// for a counterfactual and a minimal sufficient reason.

#include <iostream>

#include "nnex/classify.hpp"
#include "nnex/counterfactual.hpp"
#include "nnex/sufficient.hpp"

int main() {
    using namespace nnex;

    // Three positive and five negative corners of the 3-cube.
    std::vector<Vec> pos = {{rat(0), rat(1), rat(1)}, {rat(1), rat(0), rat(1)},
                            {rat(1), rat(1), rat(1)}};
    std::vector<Vec> neg = {{rat(0), rat(0), rat(0)}, {rat(1), rat(0), rat(0)},
                            {rat(0), rat(1), rat(0)}, {rat(1), rat(1), rat(0)},
                            {rat(0), rat(0), rat(1)}};
    LabeledDataset ds(3, pos, neg);
    MetricSpec metric = MetricSpec::hamming();
    Vec x = {rat(0), rat(0), rat(0)};

    std::cout << "label of (0,0,0): " << label_value(classify_optimistic(ds, metric, 1, x))
              << "\n";

    auto cf = cf_hamming_exact(ds, 1, x, rat(3));
    if (cf.exists())
        std::cout << "closest counterfactual: " << to_string(*cf.witness) << " at distance "
                  << to_string(*cf.achieved_powered) << "\n";

    auto check = make_checker(ds, metric, 1, x);
    auto reason = minimal_sr(ds.dimension(), check);
    std::cout << "a minimal sufficient reason:";
    for (size_t i : reason.indices) std::cout << ' ' << (i + 1);
    std::cout << "\n";
    return 0;
}
