#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flucast/calendar.hpp"
#include "flucast/common.hpp"
#include "flucast/predictor_grid.hpp"
#include "flucast/region_series.hpp"

namespace flucast {

// Which inputs the ensemble sees.
enum class FeatureMode { Full, PredictorsOnly, DataPointsOnly };

inline FeatureMode parse_feature_mode(const std::string& name) {
    if (name == "full") return FeatureMode::Full;
    if (name == "predictors") return FeatureMode::PredictorsOnly;
    if (name == "datapoints") return FeatureMode::DataPointsOnly;
    throw InvalidConfigError("unknown feature mode '" + name +
                             "' (expected full, predictors, or datapoints)");
}

inline std::string feature_mode_name(FeatureMode mode) {
    switch (mode) {
        case FeatureMode::Full: return "full";
        case FeatureMode::PredictorsOnly: return "predictors";
        case FeatureMode::DataPointsOnly: return "datapoints";
    }
    return "full";
}

// One named season of per-region data. Seasons are listed chronologically in
// configuration; training pools rows across all of them.
struct SeasonData {
    std::string label;
    std::map<std::string, RegionSeries> regions;
};

// One training / inference example. Features are, in order: the grid
// predictors' x-week-ahead totals, then last week's total, the incident
// (most recent) week's total, and the population. All series-derived values
// are divided by the region population; the target is normalized the same
// way.
struct FeatureRow {
    std::string region;
    Date as_of{};  // forecast-origin Sunday; nothing after it is visible
    int horizon = 0;
    std::vector<double> features;
    double target = 0.0;
};

struct TrainingSet {
    int horizon = 0;
    FeatureMode mode = FeatureMode::Full;
    std::size_t feature_count = 0;
    std::vector<FeatureRow> rows;
};

// In-memory predictor-panel cache keyed by (region, as_of). Panels are pure
// functions of data strictly before as_of, so entries never invalidate;
// freshly computed keys are tracked for append-only persistence.
class PanelCache {
public:
    const PredictorPanel* find(const std::string& region, Date as_of) const {
        const auto it = entries_.find({region, as_of});
        return it == entries_.end() ? nullptr : &it->second;
    }

    const PredictorPanel& put(PredictorPanel panel, bool fresh = true) {
        const std::pair<std::string, Date> key{panel.region_id, panel.as_of};
        auto [it, inserted] = entries_.emplace(key, std::move(panel));
        if (inserted && fresh) fresh_keys_.push_back(key);
        return it->second;
    }

    std::vector<const PredictorPanel*> fresh_panels() const {
        std::vector<const PredictorPanel*> out;
        for (const auto& key : fresh_keys_) out.push_back(&entries_.at(key));
        return out;
    }

    void clear_fresh() { fresh_keys_.clear(); }
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::pair<std::string, Date>, PredictorPanel> entries_;
    std::vector<std::pair<std::string, Date>> fresh_keys_;
};

// Assemble the feature vector for one (region, origin Sunday, horizon).
// Returns nothing when the region lacks the 4-week minimum of observed data
// before the origin.
inline std::optional<std::vector<double>> assemble_features(
    const RegionSeries& series, Date as_of, int horizon, FeatureMode mode, const GridSpec& grid,
    const SikjalphaConfig& base, PanelCache* cache) {
    if (!is_sunday(as_of))
        throw InvalidConfigError("feature origin " + format_date(as_of) + " is not a Sunday");
    const RegionSeries visible = series.truncated_before(as_of);
    if (visible.size() < kMinObservedDays || visible.end_date() != as_of - Days{1})
        return std::nullopt;

    const double population = static_cast<double>(series.population());
    std::vector<double> features;

    if (mode != FeatureMode::DataPointsOnly) {
        PredictorPanel local;
        const PredictorPanel* panel = cache ? cache->find(series.region_id(), as_of) : nullptr;
        if (!panel) {
            try {
                local = generate_predictor_grid(visible, grid, base);
            } catch (const InsufficientDataError&) {
                // Lag-7 grid rows need a week beyond the 4-week floor; the
                // earliest origins simply produce no row.
                return std::nullopt;
            }
            panel = cache ? &cache->put(std::move(local)) : &local;
        }
        for (const auto& daily : panel->predictors)
            features.push_back(weekly_target_from_daily(daily, horizon) / population);
    }
    if (mode != FeatureMode::PredictorsOnly) {
        const auto incident = weekly_total_at(visible, as_of - Days{7});
        const auto previous = weekly_total_at(visible, as_of - Days{14});
        if (!incident || !previous) return std::nullopt;
        features.push_back(*previous / population);
        features.push_back(*incident / population);
        features.push_back(population);
    }
    return features;
}

inline std::size_t feature_count_for(FeatureMode mode, const GridSpec& grid) {
    switch (mode) {
        case FeatureMode::Full: return grid.size() + 3;
        case FeatureMode::PredictorsOnly: return grid.size();
        case FeatureMode::DataPointsOnly: return 3;
    }
    return grid.size() + 3;
}

// Forecast-origin Sundays for a region series: at least 4 weeks of observed
// history before the origin, and (for training) the horizon's target week
// fully observed. horizon = 0 lists inference origins (no truth needed).
inline std::vector<Date> eligible_origins(const RegionSeries& series, int horizon) {
    std::vector<Date> origins;
    if (series.size() < kMinObservedDays) return origins;
    Date first = sunday_on_or_before(series.start_date() + Days{kMinObservedDays});
    if (first < series.start_date() + Days{kMinObservedDays}) first += Days{7};
    const Date last_with_data = series.end_date() + Days{1};
    for (Date w = first; w <= last_with_data; w += Days{7}) {
        if (horizon > 0 && w + Days{7 * horizon - 1} > series.end_date()) break;
        origins.push_back(w);
    }
    return origins;
}

// Rolling-origin training rows pooled over (season, region, origin). Each
// row's features are computed on data strictly before its origin; targets
// come from the same season's observed weeks.
inline TrainingSet build_training_set(const std::vector<SeasonData>& seasons, int horizon,
                                      FeatureMode mode, const GridSpec& grid,
                                      const SikjalphaConfig& base, PanelCache* cache) {
    if (horizon < 1 || horizon > 4)
        throw InvalidConfigError("build_training_set: horizon must be in 1..4");
    TrainingSet set;
    set.horizon = horizon;
    set.mode = mode;
    set.feature_count = feature_count_for(mode, grid);

    for (const auto& season : seasons) {
        for (const auto& [region, series] : season.regions) {
            for (const Date origin : eligible_origins(series, horizon)) {
                auto features = assemble_features(series, origin, horizon, mode, grid, base, cache);
                if (!features) continue;
                const auto truth = weekly_total_at(series, origin + Days{7 * (horizon - 1)});
                if (!truth) continue;
                FeatureRow row;
                row.region = region;
                row.as_of = origin;
                row.horizon = horizon;
                row.features = std::move(*features);
                row.target = *truth / static_cast<double>(series.population());
                set.rows.push_back(std::move(row));
            }
        }
    }
    if (set.rows.empty())
        throw InvalidDataError("no training rows for horizon " + std::to_string(horizon) +
                               ": no (season, week, region) meets the 4-week history and " +
                               "observed-target requirements");
    return set;
}

}  // namespace flucast
