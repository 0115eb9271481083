#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "flucast/common.hpp"
#include "flucast/region_series.hpp"
#include "flucast/sikjalpha.hpp"

namespace flucast {

inline constexpr int kHorizonDays = 28;
inline constexpr int kMinObservedDays = 28;  // 4 weeks of data before any fit

// One hyperparameter combination of the predictor grid.
struct GridLabel {
    double alpha = 0.0;
    int lambda_lag = 0;
    double mu = 0.0;
};

// Hyperparameter grid. Defaults give the 30-predictor set:
// 5 alphas x 2 lags x 3 mus.
struct GridSpec {
    std::vector<double> alphas{0.90, 0.92, 0.94, 0.96, 0.98};
    std::vector<int> lags{0, 7};
    std::vector<double> mus{1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0};

    std::size_t size() const { return alphas.size() * lags.size() * mus.size(); }

    void validate() const {
        if (alphas.empty() || lags.empty() || mus.empty())
            throw InvalidConfigError("predictor grid: empty hyperparameter set");
    }
};

// Per-region, per-week matrix of mechanistic predictors: one row per grid
// combination, each a daily forecast of length `horizon_days` starting the
// day after the data the fits saw. Row order is lexicographic over
// (alpha, lambda, mu) with each axis ascending as configured.
struct PredictorPanel {
    std::string region_id;
    Date as_of{};  // first forecast day
    std::vector<GridLabel> labels;
    std::vector<std::vector<double>> predictors;  // labels.size() rows x horizon_days
    int horizon_days = kHorizonDays;
};

// Sum of forecast days 7(x-1)+1 .. 7x (1-indexed), i.e. the x-week-ahead
// weekly total extracted from a daily trajectory.
inline double weekly_target_from_daily(std::span<const double> daily, int x) {
    if (x < 1) throw InvalidConfigError("weekly target: week index must be >= 1");
    const std::size_t needed = static_cast<std::size_t>(7 * x);
    if (daily.size() < needed)
        throw InvalidDataError("weekly target: need " + std::to_string(needed) +
                               " daily values for week " + std::to_string(x) + ", have " +
                               std::to_string(daily.size()));
    double total = 0.0;
    for (std::size_t d = needed - 7; d < needed; ++d) total += daily[d];
    return total;
}

// Fit and roll out one predictor per grid combination. `series` must end the
// day before the forecast window begins; panels for a forecast date are built
// from a series truncated to strictly-before that date.
inline PredictorPanel generate_predictor_grid(const RegionSeries& series, const GridSpec& grid,
                                              const SikjalphaConfig& base,
                                              int horizon_days = kHorizonDays) {
    grid.validate();
    if (series.size() < kMinObservedDays)
        throw InsufficientDataError("region " + series.region_id() + ": need at least " +
                                    std::to_string(kMinObservedDays) + " observed days, have " +
                                    std::to_string(series.size()));

    std::vector<double> alphas = grid.alphas;
    std::vector<int> lags = grid.lags;
    std::vector<double> mus = grid.mus;
    std::sort(alphas.begin(), alphas.end());
    std::sort(lags.begin(), lags.end());
    std::sort(mus.begin(), mus.end());

    PredictorPanel panel;
    panel.region_id = series.region_id();
    panel.as_of = series.end_date() + Days{1};
    panel.horizon_days = horizon_days;
    for (const double alpha : alphas) {
        for (const int lag : lags) {
            for (const double mu : mus) {
                SikjalphaConfig config = base;
                config.alpha = alpha;
                config.lambda_lag = lag;
                config.mu = mu;
                const SikjalphaFit fit = fit_sikjalpha(series, config);
                panel.labels.push_back({alpha, lag, mu});
                panel.predictors.push_back(forecast_daily(fit, series, horizon_days));
            }
        }
    }
    return panel;
}

}  // namespace flucast
