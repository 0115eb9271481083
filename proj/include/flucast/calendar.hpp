#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "flucast/common.hpp"

namespace flucast {

// Dates are day-resolution throughout; std::chrono::sys_days gives cheap
// value semantics and calendar arithmetic.
using Date = std::chrono::sys_days;
using Days = std::chrono::days;

inline Date make_date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year},
                                          std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok())
        throw InvalidDataError("invalid calendar date: " + std::to_string(year) + "-" +
                               std::to_string(month) + "-" + std::to_string(day));
    return Date{ymd};
}

// Parse an ISO-8601 date (YYYY-MM-DD).
inline Date parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char dash1 = 0, dash2 = 0;
    const std::string s(text);
    if (std::sscanf(s.c_str(), "%d%c%u%c%u", &y, &dash1, &m, &dash2, &d) != 5 ||
        dash1 != '-' || dash2 != '-')
        throw InvalidDataError("unparseable date: '" + s + "' (expected YYYY-MM-DD)");
    return make_date(y, m, d);
}

inline std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

inline bool is_sunday(Date date) {
    return std::chrono::weekday{date} == std::chrono::Sunday;
}

inline Date sunday_on_or_before(Date date) {
    const std::chrono::weekday wd{date};
    return date - Days{static_cast<int>(wd.c_encoding())};  // Sunday encodes as 0
}

// Epidemiological week: Sunday through Saturday, MMWR numbering
// (week 1 of a year is the week containing January 4).
struct EpiWeek {
    int year = 0;
    int week = 0;   // 1..53
    Date start{};   // always a Sunday

    Date end() const { return start + Days{6}; }
    bool contains(Date d) const { return start <= d && d <= end(); }

    auto operator<=>(const EpiWeek&) const = default;
};

inline EpiWeek to_epiweek(Date date) {
    const Date start = sunday_on_or_before(date);
    // The week's MMWR year is the calendar year of its Wednesday.
    const std::chrono::year_month_day wednesday{start + Days{3}};
    const int year = static_cast<int>(wednesday.year());
    const Date week1_start = sunday_on_or_before(make_date(year, 1, 4));
    const int week = 1 + static_cast<int>((start - week1_start).count() / 7);
    return EpiWeek{year, week, start};
}

inline std::string format_epiweek(const EpiWeek& w) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04dW%02d", w.year, w.week);
    return buf;
}

}  // namespace flucast
