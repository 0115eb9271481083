#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flucast/calendar.hpp"
#include "flucast/csv.hpp"
#include "flucast/region_series.hpp"

namespace flucast {

enum class SourceSchema { DailyHosp, WeeklyIli, FluSurv };

inline SourceSchema parse_schema(const std::string& name) {
    if (name == "daily_hosp") return SourceSchema::DailyHosp;
    if (name == "weekly_ili") return SourceSchema::WeeklyIli;
    if (name == "flusurv") return SourceSchema::FluSurv;
    throw InvalidConfigError("unknown source schema '" + name +
                             "' (expected daily_hosp, weekly_ili, or flusurv)");
}

// populations.csv: region_id,population
inline PopulationTable load_populations(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int c_region = table.require_column("region_id");
    const int c_pop = table.require_column("population");
    PopulationTable populations;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& region = table.rows[r][static_cast<std::size_t>(c_region)];
        const std::int64_t pop =
            parse_int(table.rows[r][static_cast<std::size_t>(c_pop)], table.context(r));
        if (pop <= 0)
            throw InvalidDataError(table.context(r) + ": population must be positive for region " +
                                   region);
        populations[region] = pop;
    }
    return populations;
}

namespace detail {

inline std::int64_t population_for(const PopulationTable& populations, const std::string& region,
                                   const std::string& context) {
    const auto it = populations.find(region);
    if (it != populations.end()) return it->second;
    std::string known;
    for (const auto& [code, pop] : populations) {
        if (!known.empty()) known += ", ";
        known += code;
    }
    throw InvalidDataError(context + ": unknown region code '" + region +
                           "' (valid codes: " + known + ")");
}

struct RawPoint {
    Date date{};
    double value = 0.0;
    std::size_t line = 0;
    bool has_pct = false;
    double pct = 0.0;
};

// Assemble sorted raw points into a contiguous daily series; gaps and
// duplicate dates are hard errors.
inline RegionSeries daily_from_points(const std::string& path, const std::string& region,
                                      std::int64_t population, std::vector<RawPoint> points) {
    std::sort(points.begin(), points.end(),
              [](const RawPoint& a, const RawPoint& b) { return a.date < b.date; });
    std::vector<double> values;
    std::map<Date, double> reporting;
    values.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0) {
            const auto gap = (points[i].date - points[i - 1].date).count();
            if (gap == 0)
                throw InvalidDataError(path + ":" + std::to_string(points[i].line) +
                                       ": duplicate date " + format_date(points[i].date) +
                                       " for region " + region);
            if (gap != 1)
                throw InvalidDataError(path + ":" + std::to_string(points[i].line) +
                                       ": gap in daily series for region " + region + " before " +
                                       format_date(points[i].date));
        }
        if (points[i].value < 0.0)
            throw InvalidDataError(path + ":" + std::to_string(points[i].line) +
                                   ": negative value for region " + region);
        values.push_back(points[i].value);
        if (points[i].has_pct) {
            const Date week = sunday_on_or_before(points[i].date);
            if (!(points[i].pct > 0.0 && points[i].pct <= 100.0))
                throw InvalidDataError(path + ":" + std::to_string(points[i].line) +
                                       ": reporting percentage out of (0, 100] for week " +
                                       format_date(week));
            const auto existing = reporting.find(week);
            if (existing != reporting.end() && existing->second != points[i].pct)
                throw InvalidDataError(path + ":" + std::to_string(points[i].line) +
                                       ": conflicting reporting percentages within week " +
                                       format_date(week));
            reporting[week] = points[i].pct;
        }
    }
    return RegionSeries(region, population, points.empty() ? Date{} : points.front().date,
                        std::move(values), std::move(reporting));
}

}  // namespace detail

// daily_hosp: date,region_id,value[,reporting_pct]
inline std::map<std::string, RegionSeries> ingest_daily_hosp(const std::string& path,
                                                             const PopulationTable& populations) {
    const CsvTable table = read_csv(path);
    const int c_date = table.require_column("date");
    const int c_region = table.require_column("region_id");
    const int c_value = table.require_column("value");
    const int c_pct = table.column("reporting_pct");

    std::map<std::string, std::vector<detail::RawPoint>> points;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        detail::RawPoint point;
        try {
            point.date = parse_date(row[static_cast<std::size_t>(c_date)]);
        } catch (const InvalidDataError& e) {
            throw InvalidDataError(table.context(r) + ": " + e.what());
        }
        point.value = parse_double(row[static_cast<std::size_t>(c_value)], table.context(r));
        point.line = table.line_numbers[r];
        if (c_pct >= 0 && !row[static_cast<std::size_t>(c_pct)].empty()) {
            point.has_pct = true;
            point.pct = parse_double(row[static_cast<std::size_t>(c_pct)], table.context(r));
        }
        points[row[static_cast<std::size_t>(c_region)]].push_back(point);
    }

    std::map<std::string, RegionSeries> out;
    for (auto& [region, region_points] : points) {
        const std::int64_t population = detail::population_for(
            populations, region, path + ":" + std::to_string(region_points.front().line));
        out.emplace(region,
                    detail::daily_from_points(path, region, population, std::move(region_points)));
    }
    return out;
}

// weekly_ili: date,region_id,value — date is the epiweek's Sunday; each weekly
// total becomes seven uniform daily values.
inline std::map<std::string, RegionSeries> ingest_weekly_ili(const std::string& path,
                                                             const PopulationTable& populations) {
    const CsvTable table = read_csv(path);
    const int c_date = table.require_column("date");
    const int c_region = table.require_column("region_id");
    const int c_value = table.require_column("value");

    struct WeekPoint {
        Date week_start{};
        double value = 0.0;
        std::size_t line = 0;
    };
    std::map<std::string, std::vector<WeekPoint>> weeks;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        WeekPoint point;
        try {
            point.week_start = parse_date(row[static_cast<std::size_t>(c_date)]);
        } catch (const InvalidDataError& e) {
            throw InvalidDataError(table.context(r) + ": " + e.what());
        }
        if (!is_sunday(point.week_start))
            throw InvalidDataError(table.context(r) + ": weekly date " +
                                   format_date(point.week_start) + " is not a Sunday");
        point.value = parse_double(row[static_cast<std::size_t>(c_value)], table.context(r));
        if (point.value < 0.0)
            throw InvalidDataError(table.context(r) + ": negative weekly value");
        point.line = table.line_numbers[r];
        weeks[row[static_cast<std::size_t>(c_region)]].push_back(point);
    }

    std::map<std::string, RegionSeries> out;
    for (auto& [region, region_weeks] : weeks) {
        std::sort(region_weeks.begin(), region_weeks.end(),
                  [](const WeekPoint& a, const WeekPoint& b) { return a.week_start < b.week_start; });
        std::vector<double> totals;
        for (std::size_t i = 0; i < region_weeks.size(); ++i) {
            if (i > 0) {
                const auto gap = (region_weeks[i].week_start - region_weeks[i - 1].week_start).count();
                if (gap != 7)
                    throw InvalidDataError(path + ":" + std::to_string(region_weeks[i].line) +
                                           ": weekly series for region " + region +
                                           " is not contiguous before " +
                                           format_date(region_weeks[i].week_start));
            }
            totals.push_back(region_weeks[i].value);
        }
        const std::int64_t population = detail::population_for(
            populations, region, path + ":" + std::to_string(region_weeks.front().line));
        out.emplace(region, expand_weekly_to_daily(region, population,
                                                   region_weeks.front().week_start, totals));
    }
    return out;
}

// flusurv: date,value — weekly national surveillance totals. The totals are
// scaled to national estimates via the member-state population share, then
// distributed to every target region by population and expanded to daily.
inline std::map<std::string, RegionSeries> ingest_flusurv(
    const std::string& path, const PopulationTable& populations,
    const std::vector<std::string>& member_states, std::int64_t national_population) {
    const CsvTable table = read_csv(path);
    const int c_date = table.require_column("date");
    const int c_value = table.require_column("value");

    std::vector<std::pair<Date, double>> weekly;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        Date week_start;
        try {
            week_start = parse_date(row[static_cast<std::size_t>(c_date)]);
        } catch (const InvalidDataError& e) {
            throw InvalidDataError(table.context(r) + ": " + e.what());
        }
        if (!is_sunday(week_start))
            throw InvalidDataError(table.context(r) + ": weekly date is not a Sunday");
        const double value = parse_double(row[static_cast<std::size_t>(c_value)], table.context(r));
        if (value < 0.0) throw InvalidDataError(table.context(r) + ": negative weekly value");
        weekly.emplace_back(week_start, value);
    }
    std::sort(weekly.begin(), weekly.end());
    for (std::size_t i = 1; i < weekly.size(); ++i)
        if ((weekly[i].first - weekly[i - 1].first).count() != 7)
            throw InvalidDataError(path + ": weekly series is not contiguous before " +
                                   format_date(weekly[i].first));
    if (weekly.empty()) return {};

    PopulationTable members;
    for (const auto& state : member_states)
        members[state] = detail::population_for(populations, state, path);

    std::vector<double> totals;
    totals.reserve(weekly.size());
    for (const auto& [week, value] : weekly) totals.push_back(value);

    const auto by_region =
        disaggregate_national(totals, members, populations, national_population);
    std::map<std::string, RegionSeries> out;
    for (const auto& [region, weekly_values] : by_region)
        out.emplace(region, expand_weekly_to_daily(region, populations.at(region),
                                                   weekly.front().first, weekly_values));
    return out;
}

}  // namespace flucast
