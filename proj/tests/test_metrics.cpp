#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "flucast/common.hpp"
#include "flucast/metrics.hpp"
#include "flucast/quantiles.hpp"

using namespace flucast;

namespace {

// The formula evaluated longhand in long double, kept independent of the
// library implementation.
double wis_brute_force(double truth, const std::vector<QuantilePair>& quantiles) {
    long double total = 0.0L;
    for (const auto& q : quantiles) {
        const long double indicator = (truth <= q.value) ? 1.0L : 0.0L;
        total += 2.0L * (indicator - static_cast<long double>(q.level)) *
                 (static_cast<long double>(q.value) - static_cast<long double>(truth));
    }
    return static_cast<double>(total / static_cast<long double>(quantiles.size()));
}

std::vector<QuantilePair> quantile_set(const std::vector<double>& levels,
                                       const std::vector<double>& values) {
    std::vector<QuantilePair> out;
    for (std::size_t i = 0; i < levels.size(); ++i) out.push_back({levels[i], values[i]});
    return out;
}

ScoredTarget target_with(double truth, std::vector<QuantilePair> quantiles,
                         double point = 0.0) {
    ScoredTarget t;
    t.model = "m";
    t.region = "R";
    t.week = to_epiweek(parse_date("2022-11-06"));
    t.horizon = 1;
    t.truth = truth;
    t.point = point;
    t.quantiles = std::move(quantiles);
    return t;
}

}  // namespace

TEST_CASE("mean absolute error", "[metrics]") {
    CHECK(mae(std::vector<std::pair<double, double>>{{3.0, 3.0}, {7.0, 7.0}}) == 0.0);
    CHECK(mae(std::vector<std::pair<double, double>>{{0.0, 5.0}, {10.0, 5.0}}) ==
          Catch::Approx(5.0));
    const std::vector<std::pair<double, double>> pairs{{1.0, 4.0}, {2.0, 0.0}, {9.0, 9.5}};
    std::vector<std::pair<double, double>> shuffled{pairs[2], pairs[0], pairs[1]};
    CHECK(mae(pairs) == Catch::Approx(mae(shuffled)));
    CHECK_THROWS_AS(mae(std::vector<std::pair<double, double>>{}), InvalidDataError);
}

TEST_CASE("weighted interval score", "[metrics]") {
    SECTION("all quantiles at the truth score zero") {
        const auto qs = quantile_set({0.25, 0.5, 0.75}, {2.0, 2.0, 2.0});
        CHECK(wis(2.0, qs) == 0.0);
    }
    SECTION("hand-derived K=1 example scores exactly 1/3") {
        // Summands: 2*(0-0.25)*(1-2) = 0.5; 2*(1-0.5)*0 = 0; 2*(1-0.75)*1 = 0.5.
        const auto qs = quantile_set({0.25, 0.5, 0.75}, {1.0, 2.0, 3.0});
        CHECK(wis(2.0, qs) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    }
    SECTION("matches the brute-force evaluation on randomized cases") {
        Rng rng(71);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t n_levels = 1 + 2 * rng.next_below(12);  // odd count
            std::vector<double> levels;
            for (std::size_t i = 0; i < n_levels; ++i)
                levels.push_back((static_cast<double>(i) + rng.next_double() * 0.8 + 0.1) /
                                 static_cast<double>(n_levels));
            std::sort(levels.begin(), levels.end());
            std::vector<double> values;
            for (std::size_t i = 0; i < n_levels; ++i) values.push_back(rng.next_double() * 100.0);
            std::sort(values.begin(), values.end());
            const double truth = rng.next_double() * 100.0;
            const auto qs = quantile_set(levels, values);
            CHECK(wis(truth, qs) == Catch::Approx(wis_brute_force(truth, qs)).margin(1e-12));
            CHECK(wis(truth, qs) >= -1e-15);
        }
    }
    SECTION("widening an interval around the truth increases the score") {
        const double truth = 50.0;
        double previous = -1.0;
        for (double width = 2.0; width <= 40.0; width += 2.0) {
            const auto qs =
                quantile_set({0.25, 0.5, 0.75}, {truth - width, truth, truth + width});
            const double score = wis(truth, qs);
            CHECK(score > previous);
            previous = score;
        }
    }
    SECTION("shift invariance") {
        Rng rng(73);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> values{10.0 * rng.next_double(), 20.0 + rng.next_double(),
                                       40.0 + 10.0 * rng.next_double()};
            const double truth = 25.0 + rng.next_double() * 5.0;
            const double shift = -30.0 + 60.0 * rng.next_double();
            const auto base = quantile_set({0.1, 0.5, 0.9}, values);
            for (auto& v : values) v += shift;
            const auto shifted = quantile_set({0.1, 0.5, 0.9}, values);
            CHECK(wis(truth, base) == Catch::Approx(wis(truth + shift, shifted)).margin(1e-10));
        }
    }
    SECTION("point-mass quantile set evaluates through the formula") {
        const std::vector<double> levels{0.25, 0.5, 0.75};
        const double v = 10.0;
        for (const double truth : {5.0, 10.0, 12.0}) {
            const auto qs = quantile_set(levels, {v, v, v});
            CHECK(wis(truth, qs) == Catch::Approx(wis_brute_force(truth, qs)).margin(1e-14));
        }
    }
    SECTION("unsorted levels are rejected") {
        CHECK_THROWS_AS(wis(1.0, quantile_set({0.5, 0.25}, {1.0, 2.0})), InvalidDataError);
    }
}

TEST_CASE("coverage", "[metrics]") {
    const std::vector<double> levels{0.05, 0.25, 0.5, 0.75, 0.95};
    const auto make = [&](double truth, std::vector<double> values) {
        return target_with(truth, quantile_set(levels, std::move(values)));
    };

    SECTION("always inside / always outside") {
        std::vector<ScoredTarget> inside{make(5.0, {1, 4, 5, 6, 9}), make(0.5, {0, 0.4, 1, 2, 3})};
        CHECK(coverage(inside, 0.5) == Catch::Approx(1.0));
        std::vector<ScoredTarget> above{make(10.0, {1, 2, 3, 4, 5})};
        CHECK(coverage(above, 0.5) == Catch::Approx(0.0));
        CHECK(coverage(above, 0.9) == Catch::Approx(0.0));
    }
    SECTION("nested intervals: cov90 >= cov50") {
        Rng rng(79);
        std::vector<ScoredTarget> targets;
        for (int i = 0; i < 200; ++i) {
            std::vector<double> values{10.0, 20.0, 30.0, 40.0, 50.0};
            targets.push_back(make(rng.next_double() * 60.0, values));
        }
        const double c50 = coverage(targets, 0.5);
        const double c90 = coverage(targets, 0.9);
        CHECK(c90 >= c50);
        CHECK(c50 >= 0.0);
        CHECK(c90 <= 1.0);
    }
    SECTION("missing level is reported by name") {
        auto t = target_with(1.0, quantile_set({0.25, 0.5, 0.75}, {1, 2, 3}));
        std::vector<ScoredTarget> targets{t};
        CHECK_THROWS_WITH(coverage(targets, 0.9),
                          Catch::Matchers::ContainsSubstring("0.05"));
    }
}

TEST_CASE("summaries", "[metrics]") {
    const std::vector<double> levels{0.05, 0.25, 0.5, 0.75, 0.95};
    const auto make = [&](const std::string& model, int horizon, double truth, double point) {
        ScoredTarget t = target_with(truth, quantile_set(levels, {1, 2, 3, 4, 5}), point);
        t.model = model;
        t.horizon = horizon;
        return t;
    };

    SECTION("single target summary equals its own scores") {
        std::vector<ScoredTarget> one{make("m", 1, 3.0, 4.0)};
        const auto rows = summarize(one, GroupBy::Overall);
        for (const auto& row : rows) {
            if (row.metric == "mae") CHECK(row.value == Catch::Approx(1.0));
            if (row.metric == "wis") CHECK(row.value == Catch::Approx(wis(3.0, one[0].quantiles)));
            if (row.metric == "cov50") CHECK(row.value == Catch::Approx(1.0));
        }
    }
    SECTION("weekly grouping yields one group per distinct week") {
        std::vector<ScoredTarget> targets;
        for (int w = 0; w < 3; ++w) {
            auto t = make("m", 1, 2.0, 2.0);
            t.week = to_epiweek(parse_date("2022-11-06") + Days{7 * w});
            targets.push_back(t);
        }
        const auto rows = summarize(targets, GroupBy::Week);
        std::set<std::string> groups;
        for (const auto& row : rows)
            if (row.group != "all") groups.insert(row.group);
        CHECK(groups.size() == 3);
    }
    SECTION("grand mean is the unweighted mean over targets") {
        std::vector<ScoredTarget> targets{make("m", 1, 0.0, 1.0), make("m", 2, 0.0, 3.0)};
        const auto rows = summarize(targets, GroupBy::Horizon);
        for (const auto& row : rows)
            if (row.metric == "mae" && row.group == "all") CHECK(row.value == Catch::Approx(2.0));
    }
    SECTION("point-only targets skip probabilistic rows") {
        ScoredTarget t;
        t.model = "boost";
        t.region = "R";
        t.week = to_epiweek(parse_date("2022-11-06"));
        t.horizon = 1;
        t.truth = 2.0;
        t.point = 3.0;
        const auto rows = summarize(std::vector<ScoredTarget>{t}, GroupBy::Overall);
        for (const auto& row : rows) {
            CHECK(row.metric != "wis");
            CHECK(row.metric != "cov50");
        }
    }
}
