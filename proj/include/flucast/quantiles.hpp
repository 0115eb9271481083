#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "flucast/calendar.hpp"
#include "flucast/common.hpp"

namespace flucast {

struct QuantilePair {
    double level = 0.0;
    double value = 0.0;
};

// The 23 submission levels: 0.01, 0.025, 0.05..0.95 in steps of 0.05,
// 0.975, 0.99.
inline const std::vector<double>& flusight_levels() {
    static const std::vector<double> levels = [] {
        std::vector<double> v{0.01, 0.025};
        for (int i = 1; i <= 19; ++i) v.push_back(static_cast<double>(i) * 0.05);
        v.push_back(0.975);
        v.push_back(0.99);
        return v;
    }();
    return levels;
}

// Point value plus monotone quantiles for one (region, forecast date,
// horizon), in original (de-normalized) units.
struct QuantileForecast {
    std::string region;
    Date forecast_date{};
    int horizon = 0;  // weeks ahead, 1..4
    double point = 0.0;
    std::vector<QuantilePair> quantiles;

    // Quantile value at `level`, matched within a small tolerance.
    const QuantilePair* find_level(double level) const {
        for (const auto& q : quantiles)
            if (std::abs(q.level - level) < 1e-9) return &q;
        return nullptr;
    }
};

// Empirical extraction at small sample counts can cross; sorting the values
// restores monotonicity without changing the marginal set.
inline void enforce_monotone(std::vector<QuantilePair>& quantiles) {
    std::vector<double> values;
    values.reserve(quantiles.size());
    for (const auto& q : quantiles) values.push_back(q.value);
    std::sort(values.begin(), values.end());
    for (std::size_t i = 0; i < quantiles.size(); ++i) quantiles[i].value = values[i];
}

inline void clamp_nonnegative(QuantileForecast& forecast) {
    forecast.point = std::max(0.0, forecast.point);
    for (auto& q : forecast.quantiles) q.value = std::max(0.0, q.value);
}

// Checks the QuantileForecast invariants; returns a human-readable violation
// or empty string when valid.
inline std::string check_forecast(const QuantileForecast& f, std::size_t expected_levels = 23) {
    if (f.horizon < 1 || f.horizon > 4) return "horizon out of 1..4";
    if (!(f.point >= 0.0)) return "negative or NaN point";
    if (f.quantiles.size() != expected_levels)
        return "expected " + std::to_string(expected_levels) + " quantiles, found " +
               std::to_string(f.quantiles.size());
    for (std::size_t i = 0; i < f.quantiles.size(); ++i) {
        if (!(f.quantiles[i].value >= 0.0)) return "negative or NaN quantile value";
        if (i > 0) {
            if (!(f.quantiles[i].level > f.quantiles[i - 1].level))
                return "quantile levels not strictly increasing";
            if (f.quantiles[i].value < f.quantiles[i - 1].value)
                return "quantile values cross at level " + std::to_string(f.quantiles[i].level);
        }
    }
    return {};
}

}  // namespace flucast
