#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flucast/calendar.hpp"
#include "flucast/common.hpp"
#include "flucast/quantiles.hpp"

namespace flucast {

// One (model, region, week, horizon) evaluation target. Quantiles are absent
// for point-only models.
struct ScoredTarget {
    std::string model;
    std::string region;
    EpiWeek week{};
    int horizon = 0;
    double truth = 0.0;
    double point = 0.0;
    std::vector<QuantilePair> quantiles;  // empty for point-only models
};

inline double mae(std::span<const std::pair<double, double>> truth_point_pairs) {
    if (truth_point_pairs.empty()) throw InvalidDataError("mae: no samples");
    double total = 0.0;
    for (const auto& [truth, point] : truth_point_pairs) total += std::abs(point - truth);
    return total / static_cast<double>(truth_point_pairs.size());
}

// Weighted interval score over a full quantile set:
//   WIS = (1 / (2K+1)) * sum_k 2 * (1{y <= q_k} - tau_k) * (q_k - y)
// Nonnegative for any quantile set; zero iff every quantile equals the truth.
inline double wis(double truth, std::span<const QuantilePair> quantiles) {
    if (quantiles.empty()) throw InvalidDataError("wis: no quantiles");
    for (std::size_t i = 1; i < quantiles.size(); ++i)
        if (!(quantiles[i].level > quantiles[i - 1].level))
            throw InvalidDataError("wis: quantile levels must be sorted and distinct");
    double total = 0.0;
    for (const auto& q : quantiles) {
        const double indicator = truth <= q.value ? 1.0 : 0.0;
        total += 2.0 * (indicator - q.level) * (q.value - truth);
    }
    return total / static_cast<double>(quantiles.size());
}

// Fraction of targets whose truth lies inside the central interval of the
// given nominal level, using the (0.5 - level/2) and (0.5 + level/2)
// quantiles. Targets without quantiles are excluded.
inline double coverage(std::span<const ScoredTarget> targets, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw InvalidConfigError("coverage: level must be in (0, 1)");
    const double lo_level = 0.5 - level / 2.0;
    const double hi_level = 0.5 + level / 2.0;
    std::size_t counted = 0, inside = 0;
    for (const auto& target : targets) {
        if (target.quantiles.empty()) continue;
        const QuantileForecast probe{.quantiles = target.quantiles};
        const QuantilePair* lo = probe.find_level(lo_level);
        const QuantilePair* hi = probe.find_level(hi_level);
        if (!lo || !hi)
            throw InvalidDataError("coverage: target lacks the " +
                                   std::to_string(!lo ? lo_level : hi_level) + " quantile");
        ++counted;
        if (lo->value <= target.truth && target.truth <= hi->value) ++inside;
    }
    if (counted == 0) throw InvalidDataError("coverage: no targets carry quantiles");
    return static_cast<double>(inside) / static_cast<double>(counted);
}

enum class GroupBy { Overall, Model, Week, Horizon, Region };

// Flat score-table row: (model, metric, group, value).
struct ScoreRow {
    std::string model;
    std::string metric;  // mae | wis | cov50 | cov90 | n
    std::string group;   // "all" or the group key
    double value = 0.0;
};

namespace detail {

inline std::string group_key(const ScoredTarget& target, GroupBy by) {
    switch (by) {
        case GroupBy::Week: return format_epiweek(target.week);
        case GroupBy::Horizon: return std::to_string(target.horizon) + "wk";
        case GroupBy::Region: return target.region;
        case GroupBy::Model:
        case GroupBy::Overall: return "all";
    }
    return "all";
}

inline void append_scores(std::vector<ScoreRow>& out, const std::string& model,
                          const std::string& group, std::span<const ScoredTarget> targets) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(targets.size());
    double wis_total = 0.0;
    std::size_t wis_count = 0;
    for (const auto& t : targets) {
        pairs.emplace_back(t.truth, t.point);
        if (!t.quantiles.empty()) {
            wis_total += wis(t.truth, t.quantiles);
            ++wis_count;
        }
    }
    out.push_back({model, "n", group, static_cast<double>(targets.size())});
    out.push_back({model, "mae", group, mae(pairs)});
    if (wis_count > 0) {
        out.push_back({model, "wis", group, wis_total / static_cast<double>(wis_count)});
        out.push_back({model, "cov50", group, coverage(targets, 0.50)});
        out.push_back({model, "cov90", group, coverage(targets, 0.90)});
    }
}

}  // namespace detail

// Unweighted means over all targets, overall and per group. Grouping by
// model always applies on top of `by` so tables from multi-model backtests
// stay comparable.
inline std::vector<ScoreRow> summarize(std::span<const ScoredTarget> targets, GroupBy by) {
    if (targets.empty()) throw InvalidDataError("summarize: no targets");

    std::map<std::string, std::vector<ScoredTarget>> by_model;
    for (const auto& t : targets) by_model[t.model].push_back(t);

    std::vector<ScoreRow> rows;
    for (const auto& [model, model_targets] : by_model) {
        detail::append_scores(rows, model, "all", model_targets);
        if (by == GroupBy::Overall || by == GroupBy::Model) continue;
        std::map<std::string, std::vector<ScoredTarget>> groups;
        for (const auto& t : model_targets) groups[detail::group_key(t, by)].push_back(t);
        for (const auto& [key, group_targets] : groups)
            detail::append_scores(rows, model, key, group_targets);
    }
    return rows;
}

}  // namespace flucast
