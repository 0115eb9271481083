#pragma once

#include <set>
#include <string>
#include <vector>

#include "flucast/metrics.hpp"
#include "flucast/pipeline.hpp"

namespace flucast {

struct BacktestOptions {
    std::string season_label;  // season to roll through
    EnsembleKind kind = EnsembleKind::Forest;
    std::string model_name;    // label on score rows; defaults to the kind
    PipelineParams params;
};

struct BacktestOutput {
    std::vector<ScoredTarget> targets;
    std::vector<ScoreRow> summary;  // grouped per week
    std::size_t origins_evaluated = 0;
    std::vector<std::string> skipped_origins;  // origin date + reason
};

// Rolling-origin evaluation over one season. At each origin Sunday the
// evaluated season is truncated to strictly-before the origin, models are
// trained on all earlier seasons plus the truncated one, forecasts are
// issued, and every horizon whose target week the full season observed is
// scored. Seasons after the evaluated one never participate.
inline BacktestOutput run_backtest(const std::vector<SeasonData>& seasons,
                                   const BacktestOptions& options, PanelCache& cache) {
    std::size_t target_index = seasons.size();
    for (std::size_t i = 0; i < seasons.size(); ++i)
        if (seasons[i].label == options.season_label) target_index = i;
    if (target_index == seasons.size())
        throw InvalidConfigError("backtest: unknown season '" + options.season_label + "'");
    const SeasonData& season = seasons[target_index];
    const std::string model_name =
        options.model_name.empty() ? ensemble_kind_name(options.kind) : options.model_name;

    // Union of origins at which any region can produce a 1-week-ahead target.
    std::set<Date> origin_set;
    for (const auto& [region, series] : season.regions)
        for (const Date origin : eligible_origins(series, 1)) origin_set.insert(origin);

    BacktestOutput output;
    for (const Date origin : origin_set) {
        std::vector<SeasonData> visible(seasons.begin(),
                                        seasons.begin() + static_cast<long>(target_index));
        SeasonData current;
        current.label = season.label;
        for (const auto& [region, series] : season.regions)
            current.regions.emplace(region, series.truncated_before(origin));
        visible.push_back(std::move(current));

        PipelineParams params = options.params;
        params.seed = derive_seed(options.params.seed,
                                  static_cast<std::uint64_t>(origin.time_since_epoch().count()));

        std::vector<QuantileForecast> forecasts;
        try {
            switch (options.kind) {
                case EnsembleKind::Forest:
                case EnsembleKind::LSBoost: {
                    const HorizonModels models =
                        train_horizon_models(visible, options.kind, params, &cache);
                    forecasts =
                        forecast_current(models, visible.back().regions, origin, params, &cache);
                    break;
                }
                case EnsembleKind::Mean:
                    forecasts = forecast_mean_ensemble(visible.back().regions, origin, params,
                                                       &cache);
                    break;
                case EnsembleKind::Trajectory:
                    forecasts = forecast_trajectory(visible.back().regions, origin, params);
                    break;
            }
        } catch (const Error& e) {
            output.skipped_origins.push_back(format_date(origin) + ": " + e.what());
            continue;
        }

        bool scored_any = false;
        for (const auto& forecast : forecasts) {
            const auto it = season.regions.find(forecast.region);
            if (it == season.regions.end()) continue;
            const Date target_week = origin + Days{7 * (forecast.horizon - 1)};
            const auto truth = weekly_total_at(it->second, target_week);
            if (!truth) continue;  // season ended before this horizon
            ScoredTarget target;
            target.model = model_name;
            target.region = forecast.region;
            target.week = to_epiweek(target_week);
            target.horizon = forecast.horizon;
            target.truth = *truth;
            target.point = forecast.point;
            target.quantiles = forecast.quantiles;
            output.targets.push_back(std::move(target));
            scored_any = true;
        }
        if (scored_any) ++output.origins_evaluated;
    }

    if (!output.targets.empty()) output.summary = summarize(output.targets, GroupBy::Week);
    return output;
}

}  // namespace flucast
