#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "flucast/common.hpp"
#include "flucast/predictor_grid.hpp"
#include "flucast/quantiles.hpp"
#include "flucast/region_series.hpp"
#include "flucast/sikjalpha.hpp"

namespace flucast {

// Deployed sampler settings: alpha pinned at 0.98, beta vectors drawn
// uniformly within their 95% per-coefficient confidence intervals,
// 10 samples per (lag, mu) setting -> 60 trajectories at the defaults.
struct TrajectoryOptions {
    double alpha = 0.98;
    std::vector<int> lags{0, 7};
    std::vector<double> mus{1.0 / 50.0, 1.0 / 100.0, 1.0 / 150.0};
    int n_samples = 10;
    double confidence_level = 0.95;
    int horizon_days = kHorizonDays;
};

struct TrajectorySet {
    // Each trajectory is the 1..4-week-ahead weekly totals of one sampled
    // beta rollout.
    std::vector<std::array<double, 4>> trajectories;
    // Point (trajectory mean) and quantiles per horizon, 1-based index - 1.
    std::vector<QuantileForecast> per_horizon;
};

// Sample beta rollouts for each (lag, mu) setting and summarize the 1-4 week
// targets as empirical mean + quantiles over all trajectories. Deterministic
// for a fixed seed: settings iterate lags then mus ascending, and each sample
// draws its k coordinates in index order.
inline TrajectorySet sample_trajectories(const RegionSeries& series,
                                         const TrajectoryOptions& options, std::uint64_t seed,
                                         const SikjalphaConfig& base = {},
                                         std::span<const double> levels = {}) {
    if (options.n_samples < 1)
        throw InvalidConfigError("sample_trajectories: need at least one sample per setting");
    if (options.lags.empty() || options.mus.empty())
        throw InvalidConfigError("sample_trajectories: empty lag or mu set");
    if (options.horizon_days < 28)
        throw InvalidConfigError("sample_trajectories: horizon must cover 4 weeks");
    if (levels.empty()) levels = flusight_levels();

    std::vector<int> lags = options.lags;
    std::vector<double> mus = options.mus;
    std::sort(lags.begin(), lags.end());
    std::sort(mus.begin(), mus.end());

    Rng rng(seed);
    TrajectorySet result;
    result.trajectories.reserve(lags.size() * mus.size() *
                                static_cast<std::size_t>(options.n_samples));

    for (const int lag : lags) {
        for (const double mu : mus) {
            SikjalphaConfig config = base;
            config.alpha = options.alpha;
            config.lambda_lag = lag;
            config.mu = mu;
            const SikjalphaFit fit = fit_sikjalpha(series, config);

            // Interval from the same (possibly lag-truncated) system the fit saw.
            const RegionSeries fit_view =
                lag > 0 ? series.truncated_before(series.end_date() + Days{1} - Days{lag})
                        : series;
            const DesignMatrix design = build_design(fit_view, config);
            const BetaInterval interval = beta_confidence(design.X, design.y, options.alpha,
                                                          fit.betas, options.confidence_level);

            for (int sample = 0; sample < options.n_samples; ++sample) {
                SikjalphaFit draw = fit;
                for (long i = 0; i < draw.betas.size(); ++i)
                    draw.betas(i) = rng.next_uniform(interval.lower(i), interval.upper(i));
                const std::vector<double> daily =
                    forecast_daily(draw, series, options.horizon_days);
                std::array<double, 4> weekly{};
                for (int x = 1; x <= 4; ++x)
                    weekly[static_cast<std::size_t>(x - 1)] = weekly_target_from_daily(daily, x);
                result.trajectories.push_back(weekly);
            }
        }
    }

    const Date forecast_date = series.end_date() + Days{1};
    for (int x = 1; x <= 4; ++x) {
        std::vector<double> values;
        values.reserve(result.trajectories.size());
        for (const auto& weekly : result.trajectories)
            values.push_back(weekly[static_cast<std::size_t>(x - 1)]);

        QuantileForecast forecast;
        forecast.region = series.region_id();
        forecast.forecast_date = forecast_date;
        forecast.horizon = x;
        forecast.point = mean_of(values);
        const std::vector<double> qs = empirical_quantiles(values, levels);
        for (std::size_t i = 0; i < levels.size(); ++i)
            forecast.quantiles.push_back({levels[i], qs[i]});
        enforce_monotone(forecast.quantiles);
        clamp_nonnegative(forecast);
        result.per_horizon.push_back(std::move(forecast));
    }
    return result;
}

}  // namespace flucast
