#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flucast/common.hpp"
#include "flucast/tree.hpp"

namespace flucast {

// Least-squares gradient boosting: F_0 = mean(y), stage m fits a shallow
// tree to the residuals of F_{m-1} and adds it scaled by the learn rate.
// Point forecasts only; there is deliberately no quantile path.
struct LSBoostParams {
    int n_stages = 100;
    double learn_rate = 1.0;
    int max_depth = 4;
    int min_leaf = 1;
    std::uint64_t seed = 0;
};

struct LSBoostModel {
    double initial_value = 0.0;
    double learn_rate = 1.0;
    std::vector<RegressionTree> stages;
    int feature_count = 0;
    // Training MSE after each stage (index 0 = after the first tree).
    std::vector<double> stage_train_mse;
};

inline LSBoostModel lsboost_fit(const DataMatrix& X, std::span<const double> y,
                                const LSBoostParams& params) {
    if (X.rows() == 0 || X.rows() != y.size())
        throw InvalidDataError("lsboost_fit: empty data or row/target mismatch");
    if (params.n_stages < 0) throw InvalidConfigError("lsboost_fit: negative stage count");
    if (!(params.learn_rate > 0.0 && params.learn_rate <= 1.0))
        throw InvalidConfigError("lsboost_fit: learn rate must be in (0, 1]");

    const std::size_t n = X.rows();
    LSBoostModel model;
    model.feature_count = static_cast<int>(X.cols());
    model.learn_rate = params.learn_rate;
    model.initial_value = mean_of(y);
    model.stages.reserve(static_cast<std::size_t>(params.n_stages));

    std::vector<double> residuals(n);
    for (std::size_t r = 0; r < n; ++r) residuals[r] = y[r] - model.initial_value;

    TreeParams tree_params;
    tree_params.max_depth = params.max_depth;
    tree_params.min_leaf = params.min_leaf;

    for (int m = 0; m < params.n_stages; ++m) {
        tree_params.seed = derive_seed(params.seed, static_cast<std::uint64_t>(m));
        RegressionTree stage = tree_fit(X, residuals, tree_params);

        double sse = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            residuals[r] -= params.learn_rate * stage.predict(X.row(r));
            sse += residuals[r] * residuals[r];
        }
        model.stage_train_mse.push_back(sse / static_cast<double>(n));
        model.stages.push_back(std::move(stage));
    }
    return model;
}

inline double lsboost_predict(const LSBoostModel& model, std::span<const double> x) {
    double out = model.initial_value;
    for (const auto& stage : model.stages) out += model.learn_rate * stage.predict(x);
    return out;
}

inline std::vector<SplitStat> export_split_stats(const LSBoostModel& model) {
    std::vector<SplitStat> stats;
    for (std::size_t i = 0; i < model.stages.size(); ++i)
        collect_split_stats(model.stages[i], static_cast<int>(i), stats);
    return stats;
}

}  // namespace flucast
