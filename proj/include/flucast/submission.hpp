#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flucast/calendar.hpp"
#include "flucast/csv.hpp"
#include "flucast/quantiles.hpp"

namespace flucast {

// One line of a challenge submission file. A complete (location, target)
// group is 1 point row + 23 quantile rows with monotone values; a group may
// instead be point-only (models without a quantile path).
struct SubmissionRow {
    Date forecast_date{};
    std::string target;       // "N wk ahead inc flu hosp"
    Date target_end_date{};   // Saturday closing the target week
    std::string location;
    std::string type;         // "point" or "quantile"
    std::string quantile;     // level as text, empty for point rows
    double value = 0.0;
};

inline std::string horizon_target_name(int horizon) {
    return std::to_string(horizon) + " wk ahead inc flu hosp";
}

// Under the Sunday-anchored convention the N-week-ahead target week ends
// forecast_date + 7N - 1.
inline Date target_end_date_for(Date forecast_date, int horizon) {
    return forecast_date + Days{7 * horizon - 1};
}

inline std::vector<SubmissionRow> submission_rows(const std::vector<QuantileForecast>& forecasts,
                                                  Date forecast_date) {
    std::vector<SubmissionRow> rows;
    for (const auto& forecast : forecasts) {
        SubmissionRow base;
        base.forecast_date = forecast_date;
        base.target = horizon_target_name(forecast.horizon);
        base.target_end_date = target_end_date_for(forecast_date, forecast.horizon);
        base.location = forecast.region;

        SubmissionRow point = base;
        point.type = "point";
        point.value = forecast.point;
        rows.push_back(point);
        for (const auto& q : forecast.quantiles) {
            SubmissionRow row = base;
            row.type = "quantile";
            row.quantile = format_double(q.level);
            row.value = q.value;
            rows.push_back(row);
        }
    }
    // Deterministic order: location, target, type (point before quantile),
    // then level.
    std::sort(rows.begin(), rows.end(), [](const SubmissionRow& a, const SubmissionRow& b) {
        if (a.location != b.location) return a.location < b.location;
        if (a.target != b.target) return a.target < b.target;
        if (a.type != b.type) return a.type < b.type;  // "point" < "quantile"
        return parse_double(a.quantile.empty() ? "0" : a.quantile, "sort") <
               parse_double(b.quantile.empty() ? "0" : b.quantile, "sort");
    });
    return rows;
}

// Refuses to write when any forecast breaks its invariants; partial quantile
// sets never reach disk.
inline void write_submission(const std::vector<QuantileForecast>& forecasts, Date forecast_date,
                             const std::string& path, std::size_t expected_levels = 23) {
    std::vector<std::string> violations;
    for (const auto& forecast : forecasts) {
        if (!forecast.quantiles.empty()) {
            const std::string issue = check_forecast(forecast, expected_levels);
            if (!issue.empty())
                violations.push_back(forecast.region + "/" + horizon_target_name(forecast.horizon) +
                                     ": " + issue);
        } else if (!(forecast.point >= 0.0)) {
            violations.push_back(forecast.region + "/" + horizon_target_name(forecast.horizon) +
                                 ": negative or NaN point");
        }
    }
    if (!violations.empty()) {
        std::string message = "refusing to write submission; offending rows:";
        for (const auto& v : violations) message += "\n  " + v;
        throw InvalidDataError(message);
    }

    std::vector<std::vector<std::string>> rows;
    for (const auto& row : submission_rows(forecasts, forecast_date))
        rows.push_back({format_date(row.forecast_date), row.target,
                        format_date(row.target_end_date), row.location, row.type, row.quantile,
                        format_double(row.value)});
    write_csv(path,
              {"forecast_date", "target", "target_end_date", "location", "type", "quantile",
               "value"},
              rows);
}

inline std::vector<SubmissionRow> read_submission(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int c_fd = table.require_column("forecast_date");
    const int c_target = table.require_column("target");
    const int c_ted = table.require_column("target_end_date");
    const int c_loc = table.require_column("location");
    const int c_type = table.require_column("type");
    const int c_q = table.require_column("quantile");
    const int c_v = table.require_column("value");

    std::vector<SubmissionRow> rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& fields = table.rows[r];
        SubmissionRow row;
        row.forecast_date = parse_date(fields[static_cast<std::size_t>(c_fd)]);
        row.target = fields[static_cast<std::size_t>(c_target)];
        row.target_end_date = parse_date(fields[static_cast<std::size_t>(c_ted)]);
        row.location = fields[static_cast<std::size_t>(c_loc)];
        row.type = fields[static_cast<std::size_t>(c_type)];
        row.quantile = fields[static_cast<std::size_t>(c_q)];
        row.value = parse_double(fields[static_cast<std::size_t>(c_v)], table.context(r));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Reconstruct QuantileForecast objects from submission rows (inverse of
// write_submission for complete groups).
inline std::vector<QuantileForecast> forecasts_from_rows(const std::vector<SubmissionRow>& rows) {
    std::map<std::pair<std::string, std::string>, QuantileForecast> groups;
    for (const auto& row : rows) {
        auto& forecast = groups[{row.location, row.target}];
        forecast.region = row.location;
        forecast.forecast_date = row.forecast_date;
        forecast.horizon = static_cast<int>(parse_int(row.target.substr(0, 1), "target"));
        if (row.type == "point")
            forecast.point = row.value;
        else
            forecast.quantiles.push_back({parse_double(row.quantile, "quantile level"), row.value});
    }
    std::vector<QuantileForecast> out;
    out.reserve(groups.size());
    for (auto& [key, forecast] : groups) {
        std::sort(forecast.quantiles.begin(), forecast.quantiles.end(),
                  [](const QuantilePair& a, const QuantilePair& b) { return a.level < b.level; });
        out.push_back(std::move(forecast));
    }
    return out;
}

struct ValidationReport {
    bool pass = false;
    std::vector<std::string> issues;              // empty iff pass
    std::vector<std::string> point_only_groups;   // groups with no quantile rows
    std::size_t group_count = 0;
};

// Validates every submission invariant: group completeness (1 point +
// 23 quantile rows, or point-only), level set, monotone values,
// nonnegativity, target naming, and date consistency.
inline ValidationReport validate_submission(const std::string& path,
                                            std::span<const double> expected_levels = {}) {
    if (expected_levels.empty()) expected_levels = flusight_levels();
    ValidationReport report;
    std::vector<SubmissionRow> rows;
    try {
        rows = read_submission(path);
    } catch (const Error& e) {
        report.issues.push_back(e.what());
        return report;
    }

    std::map<std::pair<std::string, std::string>, std::vector<const SubmissionRow*>> groups;
    for (const auto& row : rows) groups[{row.location, row.target}].push_back(&row);
    report.group_count = groups.size();

    for (const auto& [key, group_rows] : groups) {
        const std::string label = key.first + " / " + key.second;
        int horizon = 0;
        try {
            horizon = static_cast<int>(parse_int(key.second.substr(0, 1), "target"));
        } catch (const Error&) {
            report.issues.push_back(label + ": unparseable target name");
            continue;
        }
        if (horizon < 1 || horizon > 4 ||
            key.second != horizon_target_name(horizon)) {
            report.issues.push_back(label + ": unexpected target name");
            continue;
        }

        std::size_t point_rows = 0;
        std::vector<QuantilePair> quantiles;
        for (const SubmissionRow* row : group_rows) {
            if (row->target_end_date != target_end_date_for(row->forecast_date, horizon))
                report.issues.push_back(label + ": target_end_date is not forecast Sunday + " +
                                        std::to_string(7 * horizon - 1) + " days");
            if (!(row->value >= 0.0))
                report.issues.push_back(label + ": negative or NaN value");
            if (row->type == "point") {
                ++point_rows;
            } else if (row->type == "quantile") {
                try {
                    quantiles.push_back({parse_double(row->quantile, "level"), row->value});
                } catch (const Error&) {
                    report.issues.push_back(label + ": unparseable quantile level '" +
                                            row->quantile + "'");
                }
            } else {
                report.issues.push_back(label + ": unknown row type '" + row->type + "'");
            }
        }
        if (point_rows != 1)
            report.issues.push_back(label + ": expected exactly 1 point row, found " +
                                    std::to_string(point_rows));
        if (quantiles.empty()) {
            report.point_only_groups.push_back(label);
            continue;
        }

        std::sort(quantiles.begin(), quantiles.end(),
                  [](const QuantilePair& a, const QuantilePair& b) { return a.level < b.level; });
        if (quantiles.size() != expected_levels.size()) {
            for (const double level : expected_levels) {
                const bool present =
                    std::any_of(quantiles.begin(), quantiles.end(), [level](const QuantilePair& q) {
                        return std::abs(q.level - level) < 1e-9;
                    });
                if (!present)
                    report.issues.push_back(label + ": missing quantile level " +
                                            format_double(level));
            }
            if (quantiles.size() > expected_levels.size())
                report.issues.push_back(label + ": unexpected extra quantile rows");
        } else {
            for (std::size_t i = 0; i < quantiles.size(); ++i) {
                if (std::abs(quantiles[i].level - expected_levels[i]) > 1e-9)
                    report.issues.push_back(label + ": missing quantile level " +
                                            format_double(expected_levels[i]));
                if (i > 0 && quantiles[i].value < quantiles[i - 1].value - 1e-12)
                    report.issues.push_back(label + ": quantile values cross at level " +
                                            format_double(quantiles[i].level));
            }
        }
    }
    report.pass = report.issues.empty();
    return report;
}

}  // namespace flucast
