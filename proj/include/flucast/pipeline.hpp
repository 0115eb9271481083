#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flucast/features.hpp"
#include "flucast/forest.hpp"
#include "flucast/lsboost.hpp"
#include "flucast/quantiles.hpp"
#include "flucast/trajectories.hpp"

namespace flucast {

enum class EnsembleKind { Forest, LSBoost, Mean, Trajectory };

inline EnsembleKind parse_ensemble_kind(const std::string& name) {
    if (name == "forest") return EnsembleKind::Forest;
    if (name == "lsboost") return EnsembleKind::LSBoost;
    if (name == "mean") return EnsembleKind::Mean;
    if (name == "trajectory") return EnsembleKind::Trajectory;
    throw InvalidConfigError("unknown ensemble kind '" + name +
                             "' (expected forest, lsboost, mean, or trajectory)");
}

inline std::string ensemble_kind_name(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::Forest: return "forest";
        case EnsembleKind::LSBoost: return "lsboost";
        case EnsembleKind::Mean: return "mean";
        case EnsembleKind::Trajectory: return "trajectory";
    }
    return "forest";
}

// Everything a weekly run needs to know, with defaults matching the deployed
// configuration.
struct PipelineParams {
    GridSpec grid;
    SikjalphaConfig base;  // k = 3, J = 7
    ForestParams forest;
    LSBoostParams boost;
    TrajectoryOptions trajectory;
    FeatureMode mode = FeatureMode::Full;
    std::uint64_t seed = 0;
    std::vector<double> levels = flusight_levels();
};

// The four per-horizon ensembles of one training run.
struct HorizonModels {
    EnsembleKind kind = EnsembleKind::Forest;
    FeatureMode mode = FeatureMode::Full;
    std::size_t feature_count = 0;
    std::map<int, RandomForestModel> forests;
    std::map<int, LSBoostModel> boosts;
};

// Trains one model per horizon x in 1..4 on the pooled rolling-origin rows.
// Per-horizon seeds derive from the master seed, so the four trainings are
// order-independent and reproducible.
inline HorizonModels train_horizon_models(const std::vector<SeasonData>& seasons,
                                          EnsembleKind kind, const PipelineParams& params,
                                          PanelCache* cache) {
    if (kind != EnsembleKind::Forest && kind != EnsembleKind::LSBoost)
        throw InvalidConfigError("train_horizon_models: the " + ensemble_kind_name(kind) +
                                 " ensemble has no training step");
    HorizonModels models;
    models.kind = kind;
    models.mode = params.mode;
    models.feature_count = feature_count_for(params.mode, params.grid);

    for (int horizon = 1; horizon <= 4; ++horizon) {
        const TrainingSet set =
            build_training_set(seasons, horizon, params.mode, params.grid, params.base, cache);
        DataMatrix X(set.rows.size(), set.feature_count);
        std::vector<double> y(set.rows.size());
        for (std::size_t r = 0; r < set.rows.size(); ++r) {
            const auto& row = set.rows[r];
            std::copy(row.features.begin(), row.features.end(), X.row(r).begin());
            y[r] = row.target;
        }
        const std::uint64_t horizon_seed =
            derive_seed(params.seed, static_cast<std::uint64_t>(horizon));
        if (kind == EnsembleKind::Forest) {
            ForestParams forest_params = params.forest;
            forest_params.seed = horizon_seed;
            models.forests.emplace(horizon, forest_fit(X, y, forest_params));
        } else {
            LSBoostParams boost_params = params.boost;
            boost_params.seed = horizon_seed;
            models.boosts.emplace(horizon, lsboost_fit(X, y, boost_params));
        }
    }
    return models;
}

// Mean over the panel's predictors of their x-week-ahead totals — the naive
// ensemble the tree models are measured against.
inline double mean_ensemble_baseline(const PredictorPanel& panel, int x) {
    if (panel.predictors.empty())
        throw InvalidDataError("mean_ensemble_baseline: empty panel");
    double total = 0.0;
    for (const auto& daily : panel.predictors) total += weekly_target_from_daily(daily, x);
    return total / static_cast<double>(panel.predictors.size());
}

struct SkippedRegion {
    std::string region;
    std::string reason;
};

namespace detail {

inline QuantileForecast finalize_forecast(QuantileForecast forecast) {
    enforce_monotone(forecast.quantiles);
    clamp_nonnegative(forecast);
    return forecast;
}

}  // namespace detail

// Per-region, per-horizon forecasts as of an origin Sunday, de-normalized to
// original count units. Regions lacking the 4-week history are skipped with
// a recorded reason rather than failing the run.
inline std::vector<QuantileForecast> forecast_current(
    const HorizonModels& models, const std::map<std::string, RegionSeries>& regions, Date as_of,
    const PipelineParams& params, PanelCache* cache,
    std::vector<SkippedRegion>* skipped = nullptr) {
    std::vector<QuantileForecast> forecasts;
    for (const auto& [region, series] : regions) {
        const double population = static_cast<double>(series.population());
        bool region_ok = true;
        std::vector<QuantileForecast> region_forecasts;
        for (int horizon = 1; horizon <= 4 && region_ok; ++horizon) {
            const auto features = assemble_features(series, as_of, horizon, params.mode,
                                                    params.grid, params.base, cache);
            if (!features) {
                if (skipped)
                    skipped->push_back({region, "fewer than 4 weeks of observed data before " +
                                                    format_date(as_of)});
                region_ok = false;
                break;
            }
            QuantileForecast forecast;
            forecast.region = region;
            forecast.forecast_date = as_of;
            forecast.horizon = horizon;
            if (models.kind == EnsembleKind::Forest) {
                const auto& model = models.forests.at(horizon);
                forecast.point = population * forest_predict_mean(model, *features);
                const auto values = forest_predict_quantiles(model, *features, params.levels);
                for (std::size_t i = 0; i < params.levels.size(); ++i)
                    forecast.quantiles.push_back({params.levels[i], population * values[i]});
            } else {
                forecast.point = population * lsboost_predict(models.boosts.at(horizon), *features);
            }
            region_forecasts.push_back(detail::finalize_forecast(std::move(forecast)));
        }
        if (region_ok)
            for (auto& f : region_forecasts) forecasts.push_back(std::move(f));
    }
    return forecasts;
}

// The mean-ensemble forecaster: point = predictor mean, quantiles = the
// empirical spread of the individual predictors' weekly totals.
inline std::vector<QuantileForecast> forecast_mean_ensemble(
    const std::map<std::string, RegionSeries>& regions, Date as_of, const PipelineParams& params,
    PanelCache* cache, std::vector<SkippedRegion>* skipped = nullptr) {
    std::vector<QuantileForecast> forecasts;
    for (const auto& [region, series] : regions) {
        const RegionSeries visible = series.truncated_before(as_of);
        if (visible.size() < kMinObservedDays || visible.end_date() != as_of - Days{1}) {
            if (skipped)
                skipped->push_back({region, "fewer than 4 weeks of observed data before " +
                                                format_date(as_of)});
            continue;
        }
        PredictorPanel local;
        const PredictorPanel* panel = cache ? cache->find(region, as_of) : nullptr;
        if (!panel) {
            try {
                local = generate_predictor_grid(visible, params.grid, params.base);
            } catch (const InsufficientDataError& e) {
                if (skipped) skipped->push_back({region, e.what()});
                continue;
            }
            panel = cache ? &cache->put(std::move(local)) : &local;
        }
        for (int horizon = 1; horizon <= 4; ++horizon) {
            QuantileForecast forecast;
            forecast.region = region;
            forecast.forecast_date = as_of;
            forecast.horizon = horizon;
            forecast.point = mean_ensemble_baseline(*panel, horizon);
            std::vector<double> targets;
            targets.reserve(panel->predictors.size());
            for (const auto& daily : panel->predictors)
                targets.push_back(weekly_target_from_daily(daily, horizon));
            const auto values = empirical_quantiles(std::move(targets), params.levels);
            for (std::size_t i = 0; i < params.levels.size(); ++i)
                forecast.quantiles.push_back({params.levels[i], values[i]});
            forecasts.push_back(detail::finalize_forecast(std::move(forecast)));
        }
    }
    return forecasts;
}

// The deployed sampler path: beta draws within their confidence intervals,
// summarized into mean + quantiles per horizon.
inline std::vector<QuantileForecast> forecast_trajectory(
    const std::map<std::string, RegionSeries>& regions, Date as_of, const PipelineParams& params,
    std::vector<SkippedRegion>* skipped = nullptr) {
    std::vector<QuantileForecast> forecasts;
    for (const auto& [region, series] : regions) {
        const RegionSeries visible = series.truncated_before(as_of);
        if (visible.size() < kMinObservedDays || visible.end_date() != as_of - Days{1}) {
            if (skipped)
                skipped->push_back({region, "fewer than 4 weeks of observed data before " +
                                                format_date(as_of)});
            continue;
        }
        const std::uint64_t region_seed = derive_seed(params.seed, fnv1a64(region));
        try {
            const TrajectorySet set = sample_trajectories(visible, params.trajectory, region_seed,
                                                          params.base, params.levels);
            for (const auto& horizon_forecast : set.per_horizon)
                forecasts.push_back(horizon_forecast);
        } catch (const InsufficientDataError& e) {
            if (skipped) skipped->push_back({region, e.what()});
        }
    }
    return forecasts;
}

}  // namespace flucast
