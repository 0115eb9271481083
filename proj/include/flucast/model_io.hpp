#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flucast/csv.hpp"
#include "flucast/forest.hpp"
#include "flucast/lsboost.hpp"
#include "flucast/predictor_grid.hpp"
#include "flucast/tree.hpp"

namespace flucast {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json tree_to_json(const RegressionTree& tree) {
    nlohmann::json features = nlohmann::json::array();
    nlohmann::json thresholds = nlohmann::json::array();
    nlohmann::json lefts = nlohmann::json::array();
    nlohmann::json rights = nlohmann::json::array();
    nlohmann::json values = nlohmann::json::array();
    nlohmann::json counts = nlohmann::json::array();
    nlohmann::json mses = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
        features.push_back(node.feature);
        thresholds.push_back(node.threshold);
        lefts.push_back(node.left);
        rights.push_back(node.right);
        values.push_back(node.value);
        counts.push_back(node.n_samples);
        mses.push_back(node.mse);
    }
    return {{"feature", std::move(features)}, {"threshold", std::move(thresholds)},
            {"left", std::move(lefts)},       {"right", std::move(rights)},
            {"value", std::move(values)},     {"n_samples", std::move(counts)},
            {"mse", std::move(mses)}};
}

inline RegressionTree tree_from_json(const nlohmann::json& j, int feature_count) {
    RegressionTree tree;
    tree.feature_count = feature_count;
    const auto& features = j.at("feature");
    const std::size_t n = features.size();
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& node = tree.nodes[i];
        node.feature = j.at("feature")[i].get<int>();
        node.threshold = j.at("threshold")[i].get<double>();
        node.left = j.at("left")[i].get<int>();
        node.right = j.at("right")[i].get<int>();
        node.value = j.at("value")[i].get<double>();
        node.n_samples = j.at("n_samples")[i].get<int>();
        node.mse = j.at("mse")[i].get<double>();
    }
    if (tree.nodes.empty()) throw InvalidDataError("model file: empty tree");
    return tree;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return j;
}

}  // namespace detail

// Self-describing model files: a version tag, the effective parameters, and
// flattened node arrays per tree.

inline void save_forest(const RandomForestModel& model, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "random_forest";
    j["feature_count"] = model.feature_count;
    j["params"] = {{"n_trees", model.params.n_trees},
                   {"bootstrap", model.params.bootstrap},
                   {"max_depth", model.params.max_depth},
                   {"min_leaf", model.params.min_leaf},
                   {"feature_subsample", model.params.feature_subsample},
                   {"seed", model.params.seed}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) trees.push_back(detail::tree_to_json(tree));
    j["trees"] = std::move(trees);
    detail::write_json_file(path, j);
}

inline RandomForestModel load_forest(const std::string& path) {
    const nlohmann::json j = detail::read_json_file(path);
    if (j.value("kind", "") != "random_forest")
        throw IoError(path + ": not a random_forest model file");
    if (j.value("format_version", 0) != kModelFormatVersion)
        throw IoError(path + ": unsupported model format version");
    RandomForestModel model;
    model.feature_count = j.at("feature_count").get<int>();
    const auto& params = j.at("params");
    model.params.n_trees = params.at("n_trees").get<int>();
    model.params.bootstrap = params.at("bootstrap").get<bool>();
    model.params.max_depth = params.at("max_depth").get<int>();
    model.params.min_leaf = params.at("min_leaf").get<int>();
    model.params.feature_subsample = params.at("feature_subsample").get<int>();
    model.params.seed = params.at("seed").get<std::uint64_t>();
    for (const auto& tree : j.at("trees"))
        model.trees.push_back(detail::tree_from_json(tree, model.feature_count));
    if (static_cast<int>(model.trees.size()) != model.params.n_trees)
        throw IoError(path + ": tree count does not match params.n_trees");
    return model;
}

inline void save_lsboost(const LSBoostModel& model, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "lsboost";
    j["feature_count"] = model.feature_count;
    j["initial_value"] = model.initial_value;
    j["learn_rate"] = model.learn_rate;
    j["stage_train_mse"] = model.stage_train_mse;
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& stage : model.stages) stages.push_back(detail::tree_to_json(stage));
    j["stages"] = std::move(stages);
    detail::write_json_file(path, j);
}

inline LSBoostModel load_lsboost(const std::string& path) {
    const nlohmann::json j = detail::read_json_file(path);
    if (j.value("kind", "") != "lsboost") throw IoError(path + ": not an lsboost model file");
    if (j.value("format_version", 0) != kModelFormatVersion)
        throw IoError(path + ": unsupported model format version");
    LSBoostModel model;
    model.feature_count = j.at("feature_count").get<int>();
    model.initial_value = j.at("initial_value").get<double>();
    model.learn_rate = j.at("learn_rate").get<double>();
    model.stage_train_mse = j.at("stage_train_mse").get<std::vector<double>>();
    for (const auto& stage : j.at("stages"))
        model.stages.push_back(detail::tree_from_json(stage, model.feature_count));
    return model;
}

// Split-statistics table for the hyperparameter-sensitivity analysis.
inline void write_split_stats_csv(const std::string& path, std::span<const SplitStat> stats) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(stats.size());
    for (const auto& s : stats)
        rows.push_back({std::to_string(s.tree_id), std::to_string(s.depth),
                        std::to_string(s.feature_index), format_double(s.threshold),
                        std::to_string(s.n_samples), format_double(s.variance_reduction)});
    write_csv(path, {"tree_id", "depth", "feature_index", "threshold", "n_samples",
                     "variance_reduction"},
              rows);
}

// ---------------------------------------------------------------------------
// Predictor-panel cache: one flat table per file with columns
// region, as_of, alpha, lambda, mu, day_1..day_28. Weekly runs append new
// (region, as_of) groups and never rewrite old ones.

inline std::vector<std::string> panel_cache_header(int horizon_days = kHorizonDays) {
    std::vector<std::string> header{"region", "as_of", "alpha", "lambda", "mu"};
    for (int d = 1; d <= horizon_days; ++d) header.push_back("day_" + std::to_string(d));
    return header;
}

inline void append_panel_rows(std::vector<std::vector<std::string>>& rows,
                              const PredictorPanel& panel) {
    for (std::size_t i = 0; i < panel.labels.size(); ++i) {
        std::vector<std::string> row{panel.region_id, format_date(panel.as_of),
                                     format_double(panel.labels[i].alpha),
                                     std::to_string(panel.labels[i].lambda_lag),
                                     format_double(panel.labels[i].mu)};
        for (const double v : panel.predictors[i]) row.push_back(format_double(v));
        rows.push_back(std::move(row));
    }
}

inline std::vector<PredictorPanel> read_panel_table(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int c_region = table.require_column("region");
    const int c_as_of = table.require_column("as_of");
    const int c_alpha = table.require_column("alpha");
    const int c_lambda = table.require_column("lambda");
    const int c_mu = table.require_column("mu");
    int horizon_days = 0;
    while (table.column("day_" + std::to_string(horizon_days + 1)) >= 0) ++horizon_days;
    if (horizon_days == 0) throw IoError(path + ": no day_N columns");
    const int c_day1 = table.require_column("day_1");

    std::vector<PredictorPanel> panels;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string& region = row[static_cast<std::size_t>(c_region)];
        const Date as_of = parse_date(row[static_cast<std::size_t>(c_as_of)]);
        if (panels.empty() || panels.back().region_id != region || panels.back().as_of != as_of) {
            PredictorPanel panel;
            panel.region_id = region;
            panel.as_of = as_of;
            panel.horizon_days = horizon_days;
            panels.push_back(std::move(panel));
        }
        PredictorPanel& panel = panels.back();
        GridLabel label;
        label.alpha = parse_double(row[static_cast<std::size_t>(c_alpha)], table.context(r));
        label.lambda_lag = static_cast<int>(
            parse_int(row[static_cast<std::size_t>(c_lambda)], table.context(r)));
        label.mu = parse_double(row[static_cast<std::size_t>(c_mu)], table.context(r));
        panel.labels.push_back(label);
        std::vector<double> daily;
        daily.reserve(static_cast<std::size_t>(horizon_days));
        for (int d = 0; d < horizon_days; ++d)
            daily.push_back(parse_double(row[static_cast<std::size_t>(c_day1 + d)],
                                         table.context(r)));
        panel.predictors.push_back(std::move(daily));
    }
    return panels;
}

inline void write_panel_table(const std::string& path, std::span<const PredictorPanel> panels,
                              int horizon_days = kHorizonDays) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& panel : panels) append_panel_rows(rows, panel);
    write_csv(path, panel_cache_header(horizon_days), rows);
}

}  // namespace flucast
