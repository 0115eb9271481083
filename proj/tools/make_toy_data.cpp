// Regenerates the bundled toy dataset (data/toy): two 20-week synthetic
// seasons over three regions, plus populations and a run configuration.
// Output is fully deterministic so the committed files can be reproduced.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "flucast/calendar.hpp"
#include "flucast/common.hpp"
#include "flucast/csv.hpp"

namespace fs = std::filesystem;
using namespace flucast;

namespace {

struct RegionSpec {
    std::string region;
    std::int64_t population;
    double peak;
    int peak_day;
    double width;
};

const std::vector<RegionSpec> kRegions{{"AA", 1000000, 40.0, 70, 18.0},
                                       {"BB", 2500000, 90.0, 84, 22.0},
                                       {"CC", 500000, 22.0, 63, 15.0}};
constexpr int kSeasonDays = 140;  // 20 Sunday-aligned weeks

std::vector<double> curve(const RegionSpec& spec, int season, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> values;
    const double scale = season == 0 ? 0.8 : 1.0;
    const int shift = season == 0 ? 0 : 4;
    for (int d = 0; d < kSeasonDays; ++d) {
        const double z = (d - (spec.peak_day + shift)) / spec.width;
        const double base = scale * spec.peak * std::exp(-0.5 * z * z);
        const double wiggle = 1.0 + 0.1 * (rng.next_double() - 0.5);
        values.push_back(std::max(0.0, base * wiggle));
    }
    return values;
}

void write_season(const fs::path& path, Date start, int season) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < kRegions.size(); ++r) {
        const auto& spec = kRegions[r];
        const auto true_values = curve(spec, season, 100 + static_cast<std::uint64_t>(10 * season + r));
        for (int d = 0; d < kSeasonDays; ++d) {
            const Date date = start + Days{d};
            // Region CC under-reports at 80% for weeks 6-10 of season 2; the
            // file carries the raw (reported) values plus the percentage.
            std::string pct;
            double value = true_values[static_cast<std::size_t>(d)];
            const int week = d / 7;
            if (season == 1 && spec.region == "CC" && week >= 5 && week <= 9) {
                value *= 0.8;
                pct = "80";
            }
            rows.push_back({format_date(date), spec.region, format_double(value), pct});
        }
    }
    write_csv(path.string(), {"date", "region_id", "value", "reporting_pct"}, rows);
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out_dir = argc > 1 ? argv[1] : "data/toy";
    fs::create_directories(out_dir);

    write_season(out_dir / "season1.csv", parse_date("2021-10-03"), 0);
    write_season(out_dir / "season2.csv", parse_date("2022-10-02"), 1);

    std::vector<std::vector<std::string>> pop_rows;
    for (const auto& spec : kRegions)
        pop_rows.push_back({spec.region, std::to_string(spec.population)});
    write_csv((out_dir / "populations.csv").string(), {"region_id", "population"}, pop_rows);

    std::ofstream config(out_dir / "config.json");
    config << R"({
  "data": {
    "schema": "daily_hosp",
    "sources": {
      "season1": "season1.csv",
      "season2": "season2.csv"
    },
    "populations": "populations.csv"
  },
  "seasons": ["season1", "season2"],
  "mode": "full",
  "ensemble": "forest",
  "seed": 2022,
  "cache_dir": "cache",
  "output_dir": "out"
}
)";
    std::cout << "toy dataset written to " << out_dir.string() << "\n";
    return 0;
}
