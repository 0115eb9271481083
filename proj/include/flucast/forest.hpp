#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "flucast/common.hpp"
#include "flucast/tree.hpp"

namespace flucast {

// Bagged regression forest. Point forecasts are the mean over trees;
// probabilistic forecasts are empirical quantiles of the per-tree outputs.
struct ForestParams {
    int n_trees = 56;
    bool bootstrap = true;
    int max_depth = 0;          // 0 = unlimited
    int min_leaf = 5;
    int feature_subsample = 0;  // 0 resolves to ceil(p / 3)
    std::uint64_t seed = 0;
};

struct RandomForestModel {
    std::vector<RegressionTree> trees;
    int feature_count = 0;
    ForestParams params;
};

// Tree i trains on a bootstrap resample (with replacement, same size) under
// seed derive_seed(master, i); the bootstrap draw and the tree's node-level
// feature sampling use separate streams so disabling one does not shift the
// other.
inline RandomForestModel forest_fit(const DataMatrix& X, std::span<const double> y,
                                    const ForestParams& params) {
    if (X.rows() == 0 || X.rows() != y.size())
        throw InvalidDataError("forest_fit: empty data or row/target mismatch");
    if (params.n_trees < 1) throw InvalidConfigError("forest_fit: need at least one tree");

    const int p = static_cast<int>(X.cols());
    const int subsample = params.feature_subsample > 0
                              ? params.feature_subsample
                              : static_cast<int>((p + 2) / 3);  // ceil(p / 3)

    RandomForestModel model;
    model.feature_count = p;
    model.params = params;
    model.params.feature_subsample = subsample;
    model.trees.reserve(static_cast<std::size_t>(params.n_trees));

    const std::size_t n = X.rows();
    for (int i = 0; i < params.n_trees; ++i) {
        const std::uint64_t tree_seed = derive_seed(params.seed, static_cast<std::uint64_t>(i));

        TreeParams tree_params;
        tree_params.max_depth = params.max_depth;
        tree_params.min_leaf = params.min_leaf;
        tree_params.feature_subsample = subsample;
        tree_params.seed = tree_seed;

        if (!params.bootstrap) {
            model.trees.push_back(tree_fit(X, y, tree_params));
            continue;
        }

        Rng bootstrap_rng(derive_seed(tree_seed, 0x626F6F74ULL));
        DataMatrix Xb(n, X.cols());
        std::vector<double> yb(n);
        for (std::size_t r = 0; r < n; ++r) {
            const auto pick = static_cast<std::size_t>(bootstrap_rng.next_below(n));
            const auto src = X.row(pick);
            std::copy(src.begin(), src.end(), Xb.row(r).begin());
            yb[r] = y[pick];
        }
        model.trees.push_back(tree_fit(Xb, yb, tree_params));
    }
    return model;
}

inline std::vector<double> forest_predict_all(const RandomForestModel& model,
                                              std::span<const double> x) {
    std::vector<double> out;
    out.reserve(model.trees.size());
    for (const auto& tree : model.trees) out.push_back(tree.predict(x));
    return out;
}

// Arithmetic mean over all trees.
inline double forest_predict_mean(const RandomForestModel& model, std::span<const double> x) {
    if (model.trees.empty()) throw InvalidConfigError("forest_predict_mean: empty model");
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(x);
    return sum / static_cast<double>(model.trees.size());
}

// Empirical quantiles (linear interpolation between order statistics) of the
// per-tree predictions. Output is nondecreasing when `levels` is sorted.
inline std::vector<double> forest_predict_quantiles(const RandomForestModel& model,
                                                    std::span<const double> x,
                                                    std::span<const double> levels) {
    if (levels.empty()) throw InvalidConfigError("forest_predict_quantiles: no levels given");
    return empirical_quantiles(forest_predict_all(model, x), levels);
}

inline std::vector<SplitStat> export_split_stats(const RandomForestModel& model) {
    std::vector<SplitStat> stats;
    for (std::size_t i = 0; i < model.trees.size(); ++i)
        collect_split_stats(model.trees[i], static_cast<int>(i), stats);
    return stats;
}

}  // namespace flucast
