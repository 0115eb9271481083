#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flucast/calendar.hpp"
#include "flucast/common.hpp"

namespace flucast {

// Daily incident-hospitalization series for one region. Dates are implicit:
// day i is start_date() + i, so gaps cannot be represented at all; ingestion
// rejects non-contiguous input instead of imputing.
//
// Weekly reporting percentages (fraction of hospitals reporting, in
// (0, 100]) are keyed by the epiweek's Sunday and apply uniformly to each
// day of that week.
class RegionSeries {
public:
    RegionSeries(std::string region_id, std::int64_t population, Date start,
                 std::vector<double> incident_hosp,
                 std::map<Date, double> reporting_pct = {})
        : region_id_(std::move(region_id)),
          population_(population),
          start_(start),
          incident_(std::move(incident_hosp)),
          reporting_pct_(std::move(reporting_pct)) {
        if (population_ <= 0)
            throw InvalidDataError("region " + region_id_ + ": population must be positive");
        for (std::size_t i = 0; i < incident_.size(); ++i) {
            if (!(incident_[i] >= 0.0))
                throw InvalidDataError("region " + region_id_ + ": negative or NaN value on " +
                                       format_date(start_ + Days{static_cast<int>(i)}));
        }
        for (const auto& [week_start, pct] : reporting_pct_) {
            if (!is_sunday(week_start))
                throw InvalidDataError("region " + region_id_ +
                                       ": reporting percentage key is not a Sunday: " +
                                       format_date(week_start));
            if (!(pct > 0.0 && pct <= 100.0))
                throw InvalidDataError("region " + region_id_ +
                                       ": reporting percentage out of (0, 100] for week " +
                                       format_date(week_start));
        }
    }

    const std::string& region_id() const { return region_id_; }
    std::int64_t population() const { return population_; }
    Date start_date() const { return start_; }
    std::size_t size() const { return incident_.size(); }
    bool empty() const { return incident_.empty(); }

    // Last day with data; only valid on a nonempty series.
    Date end_date() const { return start_ + Days{static_cast<int>(size()) - 1}; }

    Date date(std::size_t i) const { return start_ + Days{static_cast<int>(i)}; }
    double value(std::size_t i) const { return incident_[i]; }
    const std::vector<double>& values() const { return incident_; }

    std::optional<double> reporting_pct_for(Date epiweek_start) const {
        const auto it = reporting_pct_.find(epiweek_start);
        if (it == reporting_pct_.end()) return std::nullopt;
        return it->second;
    }
    const std::map<Date, double>& reporting_pct() const { return reporting_pct_; }

    // Keep only days strictly before `cutoff`. The backbone of rolling-origin
    // hygiene: every as-of computation operates on a truncated copy.
    RegionSeries truncated_before(Date cutoff) const {
        if (empty() || cutoff <= start_)
            return RegionSeries(region_id_, population_, start_, {}, {});
        const auto keep = std::min<std::size_t>(
            size(), static_cast<std::size_t>((cutoff - start_).count()));
        std::vector<double> head(incident_.begin(),
                                 incident_.begin() + static_cast<std::ptrdiff_t>(keep));
        std::map<Date, double> pct;
        for (const auto& [week_start, p] : reporting_pct_)
            if (week_start < cutoff) pct.emplace(week_start, p);
        return RegionSeries(region_id_, population_, start_, std::move(head), std::move(pct));
    }

    RegionSeries with_values(std::vector<double> values) const {
        return RegionSeries(region_id_, population_, start_, std::move(values), reporting_pct_);
    }

private:
    std::string region_id_;
    std::int64_t population_;
    Date start_;
    std::vector<double> incident_;
    std::map<Date, double> reporting_pct_;
};

// Scale each day in a week with reported percentage P by 100/P; weeks with
// no percentage pass through unchanged. Percentages are validated at series
// construction, so this cannot produce negative values.
inline RegionSeries adjust_for_reporting(const RegionSeries& series) {
    std::vector<double> adjusted(series.values());
    for (std::size_t i = 0; i < adjusted.size(); ++i) {
        const Date week_start = sunday_on_or_before(series.date(i));
        if (const auto pct = series.reporting_pct_for(week_start))
            adjusted[i] *= 100.0 / *pct;
    }
    return RegionSeries(series.region_id(), series.population(), series.start_date(),
                        std::move(adjusted), series.reporting_pct());
}

// Weekly totals over complete epiweeks; partial leading/trailing weeks are
// dropped. Empty input yields empty output.
inline std::vector<std::pair<EpiWeek, double>> aggregate_weekly(const RegionSeries& series) {
    std::vector<std::pair<EpiWeek, double>> out;
    if (series.empty()) return out;
    Date week_start = sunday_on_or_before(series.start_date());
    if (week_start < series.start_date()) week_start += Days{7};
    while (week_start + Days{6} <= series.end_date()) {
        double total = 0.0;
        const auto offset = static_cast<std::size_t>((week_start - series.start_date()).count());
        for (std::size_t d = 0; d < 7; ++d) total += series.value(offset + d);
        out.emplace_back(to_epiweek(week_start), total);
        week_start += Days{7};
    }
    return out;
}

// Sum of the 7 days of the epiweek starting at `week_start`, if fully covered.
inline std::optional<double> weekly_total_at(const RegionSeries& series, Date week_start) {
    if (series.empty()) return std::nullopt;
    if (week_start < series.start_date() || week_start + Days{6} > series.end_date())
        return std::nullopt;
    const auto offset = static_cast<std::size_t>((week_start - series.start_date()).count());
    double total = 0.0;
    for (std::size_t d = 0; d < 7; ++d) total += series.value(offset + d);
    return total;
}

// ---------------------------------------------------------------------------
// Surveillance-network disaggregation. The weekly totals observed across the
// network's member states are scaled up to a national estimate (divide by the
// member-population share) and then distributed to each target region in
// proportion to its population.

using PopulationTable = std::map<std::string, std::int64_t>;

inline std::map<std::string, std::vector<double>> disaggregate_national(
    const std::vector<double>& surveillance_weekly,
    const PopulationTable& member_populations,
    const PopulationTable& target_populations,
    std::int64_t national_population) {
    if (national_population <= 0)
        throw InvalidConfigError("disaggregate_national: national population must be positive");
    if (member_populations.empty())
        throw InvalidConfigError("disaggregate_national: no member populations given");

    double member_sum = 0.0;
    for (const auto& [region, pop] : member_populations) {
        if (pop <= 0)
            throw InvalidConfigError("disaggregate_national: non-positive population for member " +
                                     region);
        member_sum += static_cast<double>(pop);
    }

    std::map<std::string, std::vector<double>> out;
    for (const auto& [region, pop] : target_populations) {
        if (pop <= 0)
            throw InvalidConfigError("disaggregate_national: non-positive population for region " +
                                     region);
        std::vector<double> scaled;
        scaled.reserve(surveillance_weekly.size());
        const double share = static_cast<double>(pop) / static_cast<double>(national_population);
        for (const double total : surveillance_weekly) {
            const double national_estimate =
                total / (member_sum / static_cast<double>(national_population));
            scaled.push_back(national_estimate * share);
        }
        out.emplace(region, std::move(scaled));
    }
    return out;
}

// Convenience form where the member states are also the targets.
inline std::map<std::string, std::vector<double>> disaggregate_national(
    const std::vector<double>& surveillance_weekly,
    const PopulationTable& member_populations,
    std::int64_t national_population) {
    return disaggregate_national(surveillance_weekly, member_populations, member_populations,
                                 national_population);
}

// Expand weekly totals (first week starting at `first_week_start`, a Sunday)
// into a daily series by spreading each total uniformly over its 7 days.
inline RegionSeries expand_weekly_to_daily(std::string region_id, std::int64_t population,
                                           Date first_week_start,
                                           const std::vector<double>& weekly_totals) {
    if (!is_sunday(first_week_start))
        throw InvalidDataError("expand_weekly_to_daily: week start " +
                               format_date(first_week_start) + " is not a Sunday");
    std::vector<double> daily;
    daily.reserve(weekly_totals.size() * 7);
    for (const double total : weekly_totals) {
        if (!(total >= 0.0))
            throw InvalidDataError("expand_weekly_to_daily: negative weekly total in region " +
                                   region_id);
        for (int d = 0; d < 7; ++d) daily.push_back(total / 7.0);
    }
    return RegionSeries(std::move(region_id), population, first_week_start, std::move(daily));
}

}  // namespace flucast
