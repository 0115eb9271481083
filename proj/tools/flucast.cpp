// Weekly forecasting driver: prepare data, build predictor panels, train the
// per-horizon ensembles, emit submission files, and score results.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flucast/flucast.hpp"

namespace fs = std::filesystem;
using namespace flucast;

namespace {

struct CliOptions {
    std::string config_path;
    std::string as_of;
    std::string mode;
    std::string ensemble;
    std::optional<std::uint64_t> seed;
    std::string season;
    std::string model_label;
    std::vector<std::string> submissions;
};

RunConfig load_config(const CliOptions& options) {
    RunConfig config = load_run_config(options.config_path);
    if (!options.mode.empty()) config.params.mode = parse_feature_mode(options.mode);
    if (!options.ensemble.empty()) config.ensemble = parse_ensemble_kind(options.ensemble);
    if (options.seed) config.params.seed = *options.seed;
    return config;
}

fs::path prepared_path(const RunConfig& config, const std::string& label) {
    return fs::path(config.cache_dir) / "prepared" / (label + ".csv");
}

fs::path panels_path(const RunConfig& config, const std::string& label) {
    return fs::path(config.cache_dir) / "panels" / (label + ".csv");
}

fs::path model_path(const RunConfig& config, EnsembleKind kind, FeatureMode mode, int horizon) {
    return fs::path(config.cache_dir) / "models" /
           (ensemble_kind_name(kind) + "_" + feature_mode_name(mode) + "_h" +
            std::to_string(horizon) + ".json");
}

// Prepared view of the configured seasons: read the prepared cache when
// present, ingest + adjust otherwise.
std::vector<SeasonData> load_prepared(const RunConfig& config) {
    const PopulationTable populations = load_populations(config.resolve(config.populations_path));
    std::vector<SeasonData> seasons;
    for (const auto& label : config.seasons) {
        const fs::path cached = prepared_path(config, label);
        if (fs::exists(cached)) {
            SeasonData season;
            season.label = label;
            season.regions = ingest_daily_hosp(cached.string(), populations);
            seasons.push_back(std::move(season));
        } else {
            seasons.push_back(load_one_season(config, label, populations));
        }
    }
    return seasons;
}

void write_prepared(const RunConfig& config, const SeasonData& season) {
    fs::create_directories(fs::path(config.cache_dir) / "prepared");
    std::vector<std::vector<std::string>> rows;
    for (const auto& [region, series] : season.regions)
        for (std::size_t i = 0; i < series.size(); ++i)
            rows.push_back({format_date(series.date(i)), region, format_double(series.value(i))});
    write_csv(prepared_path(config, season.label).string(), {"date", "region_id", "value"}, rows);
}

// Panel files are append-only; fresh keys are written to the season whose
// data window contains them.
void load_panel_files(const RunConfig& config, PanelCache& cache) {
    for (const auto& label : config.seasons) {
        const fs::path path = panels_path(config, label);
        if (!fs::exists(path)) continue;
        for (auto& panel : read_panel_table(path.string())) cache.put(std::move(panel), false);
    }
}

const SeasonData* season_for_origin(const std::vector<SeasonData>& seasons, Date as_of) {
    const SeasonData* found = nullptr;
    for (const auto& season : seasons) {
        for (const auto& [region, series] : season.regions) {
            if (series.empty()) continue;
            if (series.start_date() < as_of && as_of <= series.end_date() + Days{7}) found = &season;
            break;  // regions of a season share one window
        }
    }
    return found;
}

void persist_fresh_panels(const RunConfig& config, const std::vector<SeasonData>& seasons,
                          PanelCache& cache) {
    std::map<std::string, std::vector<const PredictorPanel*>> by_season;
    for (const PredictorPanel* panel : cache.fresh_panels()) {
        const SeasonData* season = season_for_origin(seasons, panel->as_of);
        if (season) by_season[season->label].push_back(panel);
    }
    fs::create_directories(fs::path(config.cache_dir) / "panels");
    for (const auto& [label, panels] : by_season) {
        const fs::path path = panels_path(config, label);
        std::vector<PredictorPanel> existing;
        if (fs::exists(path)) existing = read_panel_table(path.string());
        for (const PredictorPanel* panel : panels) existing.push_back(*panel);
        std::sort(existing.begin(), existing.end(),
                  [](const PredictorPanel& a, const PredictorPanel& b) {
                      return std::tie(a.as_of, a.region_id) < std::tie(b.as_of, b.region_id);
                  });
        write_panel_table(path.string(), existing);
    }
    cache.clear_fresh();
}

Date resolve_as_of(const CliOptions& options, const std::vector<SeasonData>& seasons) {
    if (!options.as_of.empty()) {
        const Date as_of = parse_date(options.as_of);
        if (!is_sunday(as_of))
            throw InvalidConfigError("--as-of " + options.as_of + " is not a Sunday");
        return as_of;
    }
    // Default: the Sunday after the newest observed day.
    Date latest{};
    bool any = false;
    for (const auto& season : seasons)
        for (const auto& [region, series] : season.regions)
            if (!series.empty() && (!any || series.end_date() > latest)) {
                latest = series.end_date();
                any = true;
            }
    if (!any) throw InvalidDataError("no observed data to anchor --as-of");
    Date as_of = latest + Days{1};
    if (!is_sunday(as_of)) as_of = sunday_on_or_before(as_of);
    return as_of;
}

int cmd_prepare(const CliOptions& options) {
    const RunConfig config = load_config(options);
    const std::vector<SeasonData> seasons = load_seasons(config);
    for (const auto& season : seasons) {
        write_prepared(config, season);
        std::size_t days = 0;
        for (const auto& [region, series] : season.regions) days += series.size();
        std::cout << "prepared " << season.label << ": " << season.regions.size() << " regions, "
                  << days << " region-days -> " << prepared_path(config, season.label).string()
                  << "\n";
    }
    return 0;
}

int cmd_predictors(const CliOptions& options) {
    const RunConfig config = load_config(options);
    const std::vector<SeasonData> seasons = load_prepared(config);
    PanelCache cache;
    load_panel_files(config, cache);

    std::size_t computed = 0, reused = 0;
    for (const auto& season : seasons) {
        for (const auto& [region, series] : season.regions) {
            for (const Date origin : eligible_origins(series, 0)) {
                if (cache.find(region, origin)) {
                    ++reused;
                    continue;
                }
                try {
                    cache.put(generate_predictor_grid(series.truncated_before(origin),
                                                      config.params.grid, config.params.base));
                    ++computed;
                } catch (const InsufficientDataError&) {
                    // Earliest origins cannot support the lagged grid rows.
                }
            }
        }
    }
    persist_fresh_panels(config, seasons, cache);
    std::cout << "predictor panels: " << computed << " computed, " << reused
              << " reused from cache\n";
    return 0;
}

int cmd_train(const CliOptions& options) {
    const RunConfig config = load_config(options);
    if (config.ensemble != EnsembleKind::Forest && config.ensemble != EnsembleKind::LSBoost) {
        std::cerr << "the " << ensemble_kind_name(config.ensemble)
                  << " ensemble has no training step\n";
        return 1;
    }
    const std::vector<SeasonData> seasons = load_prepared(config);
    PanelCache cache;
    load_panel_files(config, cache);

    const HorizonModels models =
        train_horizon_models(seasons, config.ensemble, config.params, &cache);
    fs::create_directories(fs::path(config.cache_dir) / "models");
    for (int x = 1; x <= 4; ++x) {
        const fs::path path = model_path(config, config.ensemble, config.params.mode, x);
        if (config.ensemble == EnsembleKind::Forest) {
            save_forest(models.forests.at(x), path.string());
            write_split_stats_csv(path.string() + ".splits.csv",
                                  export_split_stats(models.forests.at(x)));
        } else {
            save_lsboost(models.boosts.at(x), path.string());
            write_split_stats_csv(path.string() + ".splits.csv",
                                  export_split_stats(models.boosts.at(x)));
        }
        std::cout << "trained horizon " << x << " -> " << path.string() << "\n";
    }
    persist_fresh_panels(config, seasons, cache);
    return 0;
}

int cmd_forecast(const CliOptions& options) {
    const RunConfig config = load_config(options);
    const std::vector<SeasonData> seasons = load_prepared(config);
    const Date as_of = resolve_as_of(options, seasons);
    const SeasonData* current = season_for_origin(seasons, as_of);
    if (!current)
        throw InvalidDataError("no season covers forecast date " + format_date(as_of));

    PanelCache cache;
    load_panel_files(config, cache);

    std::vector<SkippedRegion> skipped;
    std::vector<QuantileForecast> forecasts;
    switch (config.ensemble) {
        case EnsembleKind::Forest:
        case EnsembleKind::LSBoost: {
            HorizonModels models;
            models.kind = config.ensemble;
            models.mode = config.params.mode;
            for (int x = 1; x <= 4; ++x) {
                const fs::path path = model_path(config, config.ensemble, config.params.mode, x);
                if (!fs::exists(path))
                    throw InvalidConfigError("missing model file " + path.string() +
                                             " (run `train` first)");
                if (config.ensemble == EnsembleKind::Forest)
                    models.forests.emplace(x, load_forest(path.string()));
                else
                    models.boosts.emplace(x, load_lsboost(path.string()));
            }
            forecasts = forecast_current(models, current->regions, as_of, config.params, &cache,
                                         &skipped);
            break;
        }
        case EnsembleKind::Mean:
            forecasts =
                forecast_mean_ensemble(current->regions, as_of, config.params, &cache, &skipped);
            break;
        case EnsembleKind::Trajectory:
            forecasts = forecast_trajectory(current->regions, as_of, config.params, &skipped);
            break;
    }
    for (const auto& skip : skipped)
        std::cerr << "skipped " << skip.region << ": " << skip.reason << "\n";
    if (forecasts.empty()) {
        std::cerr << "no region produced a forecast\n";
        return 1;
    }

    fs::create_directories(config.output_dir);
    const fs::path out = fs::path(config.output_dir) /
                         ("submission_" + ensemble_kind_name(config.ensemble) + "_" +
                          format_date(as_of) + ".csv");
    write_submission(forecasts, as_of, out.string(), config.params.levels.size());
    persist_fresh_panels(config, seasons, cache);

    const ValidationReport report = validate_submission(out.string(), config.params.levels);
    std::cout << "submission: " << out.string() << " (" << forecasts.size() << " forecasts, "
              << (report.pass ? "valid" : "INVALID") << ")\n";
    if (!report.pass) {
        for (const auto& issue : report.issues) std::cerr << "  " << issue << "\n";
        return 1;
    }
    return 0;
}

int cmd_evaluate(const CliOptions& options) {
    const RunConfig config = load_config(options);
    if (options.submissions.empty()) {
        std::cerr << "evaluate: give at least one submission file\n";
        return 1;
    }
    const std::vector<SeasonData> seasons = load_prepared(config);

    std::vector<ScoredTarget> targets;
    for (const auto& path : options.submissions) {
        const ValidationReport report = validate_submission(path, config.params.levels);
        if (!report.pass) {
            std::cerr << path << ": validation failed\n";
            for (const auto& issue : report.issues) std::cerr << "  " << issue << "\n";
            return 1;
        }
        const std::string label = options.model_label.empty()
                                      ? fs::path(path).stem().string()
                                      : options.model_label;
        std::size_t missing_truth = 0;
        for (const auto& forecast : forecasts_from_rows(read_submission(path))) {
            const Date week_start = forecast.forecast_date + Days{7 * (forecast.horizon - 1)};
            std::optional<double> truth;
            for (const auto& season : seasons) {
                const auto it = season.regions.find(forecast.region);
                if (it == season.regions.end()) continue;
                if (const auto t = weekly_total_at(it->second, week_start)) truth = t;
            }
            if (!truth) {
                ++missing_truth;
                continue;
            }
            ScoredTarget target;
            target.model = label;
            target.region = forecast.region;
            target.week = to_epiweek(week_start);
            target.horizon = forecast.horizon;
            target.truth = *truth;
            target.point = forecast.point;
            target.quantiles = forecast.quantiles;
            targets.push_back(std::move(target));
        }
        if (missing_truth > 0)
            std::cerr << path << ": " << missing_truth << " targets lack observed truth\n";
    }
    if (targets.empty()) {
        std::cerr << "evaluate: no scorable targets\n";
        return 1;
    }

    const std::vector<ScoreRow> rows = summarize(targets, GroupBy::Week);
    fs::create_directories(config.output_dir);
    const fs::path out = fs::path(config.output_dir) / "scores.csv";
    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& row : rows)
        csv_rows.push_back({row.model, row.metric, row.group, format_double(row.value)});
    write_csv(out.string(), {"model", "metric", "group", "value"}, csv_rows);

    for (const auto& row : rows)
        if (row.group == "all")
            std::cout << row.model << " " << row.metric << " = " << format_double(row.value)
                      << "\n";
    std::cout << "score table: " << out.string() << "\n";
    return 0;
}

int cmd_backtest(const CliOptions& options) {
    const RunConfig config = load_config(options);
    if (options.season.empty()) {
        std::cerr << "backtest: --season is required\n";
        return 1;
    }
    const std::vector<SeasonData> seasons = load_prepared(config);
    PanelCache cache;
    load_panel_files(config, cache);

    BacktestOptions backtest;
    backtest.season_label = options.season;
    backtest.kind = config.ensemble;
    backtest.model_name = options.model_label;
    backtest.params = config.params;
    const BacktestOutput output = run_backtest(seasons, backtest, cache);
    persist_fresh_panels(config, seasons, cache);

    for (const auto& skip : output.skipped_origins) std::cerr << "skipped " << skip << "\n";
    if (output.targets.empty()) {
        std::cerr << "backtest produced no scorable targets\n";
        return 1;
    }

    fs::create_directories(config.output_dir);
    const fs::path out = fs::path(config.output_dir) /
                         ("backtest_" + options.season + "_" +
                          ensemble_kind_name(config.ensemble) + "_" +
                          feature_mode_name(config.params.mode) + ".csv");
    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& row : output.summary)
        csv_rows.push_back({row.model, row.metric, row.group, format_double(row.value)});
    write_csv(out.string(), {"model", "metric", "group", "value"}, csv_rows);

    std::cout << "backtest " << options.season << " (" << ensemble_kind_name(config.ensemble)
              << ", " << feature_mode_name(config.params.mode) << "): "
              << output.origins_evaluated << " origins, " << output.targets.size()
              << " targets\n";
    for (const auto& row : output.summary)
        if (row.group == "all")
            std::cout << "  " << row.metric << " = " << format_double(row.value) << "\n";
    std::cout << "score table: " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SIkJalpha tree-ensemble hospitalization forecasting"};
    app.require_subcommand(1);

    CliOptions options;
    app.add_option("--config", options.config_path, "run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--as-of", options.as_of, "forecast-origin Sunday (YYYY-MM-DD)");
    app.add_option("--mode", options.mode, "feature mode: full|predictors|datapoints");
    app.add_option("--ensemble", options.ensemble,
                   "ensemble kind: forest|lsboost|mean|trajectory");
    app.add_option("--seed", options.seed, "master RNG seed");

    app.add_subcommand("prepare", "ingest sources, apply reporting adjustment, cache the result");
    app.add_subcommand("predictors", "build or append the predictor-panel cache");
    app.add_subcommand("train", "train the per-horizon ensembles");
    app.add_subcommand("forecast", "emit a submission file for the forecast date");
    auto* evaluate =
        app.add_subcommand("evaluate", "score submission files against observed truth");
    evaluate->add_option("submissions", options.submissions, "submission csv files")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--model", options.model_label, "model label for the score table");
    auto* backtest = app.add_subcommand("backtest", "rolling-origin evaluation over a season");
    backtest->add_option("--season", options.season, "season label to roll through");
    backtest->add_option("--model", options.model_label, "model label for the score table");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("prepare")) return cmd_prepare(options);
        if (app.got_subcommand("predictors")) return cmd_predictors(options);
        if (app.got_subcommand("train")) return cmd_train(options);
        if (app.got_subcommand("forecast")) return cmd_forecast(options);
        if (app.got_subcommand("evaluate")) return cmd_evaluate(options);
        if (app.got_subcommand("backtest")) return cmd_backtest(options);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
