#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "flucast/model_io.hpp"
#include "flucast/quantiles.hpp"
#include "support/builders.hpp"
#include "support/tempdir.hpp"

using namespace flucast;
using flucast::testing::TempDir;

namespace {

struct Dataset {
    DataMatrix X;
    std::vector<double> y;
};

Dataset random_dataset(std::uint64_t seed, int rows, int cols) {
    Rng rng(seed);
    Dataset data;
    for (int r = 0; r < rows; ++r) {
        std::vector<double> row;
        for (int c = 0; c < cols; ++c) row.push_back(rng.next_double() * 4.0);
        data.X.push_row(row);
        data.y.push_back(row[0] + 0.3 * rng.next_double());
    }
    return data;
}

}  // namespace

TEST_CASE("forest models survive a save/load round trip", "[model_io]") {
    TempDir dir;
    const Dataset data = random_dataset(1, 50, 5);
    const RandomForestModel model = forest_fit(data.X, data.y, {.n_trees = 8, .seed = 42});
    const std::string path = dir.file("forest.json");
    save_forest(model, path);
    const RandomForestModel loaded = load_forest(path);

    CHECK(loaded.feature_count == model.feature_count);
    CHECK(loaded.params.n_trees == model.params.n_trees);
    REQUIRE(loaded.trees.size() == model.trees.size());
    for (std::size_t r = 0; r < data.X.rows(); ++r) {
        CHECK(forest_predict_mean(loaded, data.X.row(r)) ==
              forest_predict_mean(model, data.X.row(r)));
        const auto a = forest_predict_quantiles(model, data.X.row(r), flusight_levels());
        const auto b = forest_predict_quantiles(loaded, data.X.row(r), flusight_levels());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
}

TEST_CASE("boost models survive a save/load round trip", "[model_io]") {
    TempDir dir;
    const Dataset data = random_dataset(2, 40, 3);
    const LSBoostModel model =
        lsboost_fit(data.X, data.y, {.n_stages = 25, .learn_rate = 0.5, .seed = 9});
    const std::string path = dir.file("boost.json");
    save_lsboost(model, path);
    const LSBoostModel loaded = load_lsboost(path);

    CHECK(loaded.initial_value == model.initial_value);
    CHECK(loaded.learn_rate == model.learn_rate);
    CHECK(loaded.stage_train_mse == model.stage_train_mse);
    for (std::size_t r = 0; r < data.X.rows(); ++r)
        CHECK(lsboost_predict(loaded, data.X.row(r)) == lsboost_predict(model, data.X.row(r)));
}

TEST_CASE("model files are self-describing", "[model_io]") {
    TempDir dir;
    const Dataset data = random_dataset(3, 20, 2);
    const RandomForestModel forest = forest_fit(data.X, data.y, {.n_trees = 2, .seed = 1});
    const std::string forest_path = dir.file("forest.json");
    save_forest(forest, forest_path);
    CHECK_THROWS_AS(load_lsboost(forest_path), IoError);
    CHECK_THROWS_AS(load_forest(dir.file("missing.json")), IoError);
}

TEST_CASE("panel tables round-trip exactly", "[model_io]") {
    TempDir dir;
    const auto seasons = flucast::testing::make_toy_seasons();
    const RegionSeries& series = seasons[0].regions.at("AA");

    std::vector<PredictorPanel> panels;
    for (int week = 5; week <= 7; ++week) {
        const RegionSeries visible =
            series.truncated_before(series.start_date() + Days{7 * week});
        panels.push_back(generate_predictor_grid(visible, GridSpec{}, SikjalphaConfig{}));
    }
    const std::string path = dir.file("panels.csv");
    write_panel_table(path, panels);
    const auto loaded = read_panel_table(path);

    REQUIRE(loaded.size() == panels.size());
    for (std::size_t p = 0; p < panels.size(); ++p) {
        CHECK(loaded[p].region_id == panels[p].region_id);
        CHECK(loaded[p].as_of == panels[p].as_of);
        REQUIRE(loaded[p].labels.size() == panels[p].labels.size());
        for (std::size_t i = 0; i < panels[p].labels.size(); ++i) {
            CHECK(loaded[p].labels[i].alpha == panels[p].labels[i].alpha);
            CHECK(loaded[p].labels[i].lambda_lag == panels[p].labels[i].lambda_lag);
            CHECK(loaded[p].labels[i].mu == panels[p].labels[i].mu);
            for (std::size_t d = 0; d < panels[p].predictors[i].size(); ++d)
                CHECK(loaded[p].predictors[i][d] == panels[p].predictors[i][d]);
        }
    }
}

TEST_CASE("split statistics export to a flat table", "[model_io]") {
    TempDir dir;
    const Dataset data = random_dataset(4, 60, 4);
    const RandomForestModel model = forest_fit(data.X, data.y, {.n_trees = 4, .seed = 3});
    const auto stats = export_split_stats(model);
    const std::string path = dir.file("splits.csv");
    write_split_stats_csv(path, stats);
    const CsvTable table = read_csv(path);
    CHECK(table.rows.size() == stats.size());
    CHECK(table.require_column("variance_reduction") == 5);
}
