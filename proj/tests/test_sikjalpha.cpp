#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "flucast/common.hpp"
#include "flucast/region_series.hpp"
#include "flucast/sikjalpha.hpp"
#include "support/builders.hpp"

using namespace flucast;
using flucast::testing::simulate_sikjalpha;
using flucast::testing::toy_sunday;

namespace {

// Independent lag-builder: assembles each row by direct summation over the
// raw incident values instead of a prefix-sum array.
DesignMatrix brute_force_design(const RegionSeries& series, const SikjalphaConfig& config) {
    const int window = config.k * config.bin_days;
    const int total = static_cast<int>(series.size());
    const double mu_n = config.mu * static_cast<double>(series.population());

    DesignMatrix out;
    out.X.resize(total - window, config.k);
    out.y.resize(total - window);
    for (int t = window; t < total; ++t) {
        double cumulative = 0.0;
        for (int s = 0; s < t; ++s) cumulative += series.value(static_cast<std::size_t>(s));
        const double susceptible = std::clamp(1.0 - cumulative / mu_n, 0.0, 1.0);
        for (int i = 1; i <= config.k; ++i) {
            // Bin i covers days t-iJ .. t-(i-1)J-1.
            double bin_sum = 0.0;
            for (int s = t - i * config.bin_days; s < t - (i - 1) * config.bin_days; ++s)
                if (s >= 0) bin_sum += series.value(static_cast<std::size_t>(s));
            out.X(t - window, i - 1) = susceptible * bin_sum;
        }
        out.y(t - window) = series.value(static_cast<std::size_t>(t));
    }
    return out;
}

double weighted_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                          const Eigen::VectorXd& beta) {
    double total = 0.0;
    const auto rows = X.rows();
    for (long t = 0; t < rows; ++t) {
        const double r = y(t) - X.row(t).dot(beta);
        total += std::pow(alpha, static_cast<double>(rows - 1 - t)) * r * r;
    }
    return total;
}

// Enumerates every support set, solves the restricted unconstrained problem
// and keeps the feasible candidate with the least squared error. The NNLS
// optimum always appears among the candidates.
Eigen::VectorXd nnls_by_enumeration(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(A.cols());
    Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
    double best_sse = (y - A * best).squaredNorm();
    for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<int> support;
        for (int j = 0; j < n; ++j)
            if (mask & (1 << j)) support.push_back(j);
        Eigen::MatrixXd Ap(A.rows(), static_cast<long>(support.size()));
        for (std::size_t c = 0; c < support.size(); ++c)
            Ap.col(static_cast<long>(c)) = A.col(support[c]);
        const Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(y);
        if ((z.array() < 0.0).any()) continue;
        Eigen::VectorXd candidate = Eigen::VectorXd::Zero(n);
        for (std::size_t c = 0; c < support.size(); ++c)
            candidate(support[c]) = z(static_cast<long>(c));
        const double sse = (y - A * candidate).squaredNorm();
        if (sse < best_sse - 1e-12) {
            best_sse = sse;
            best = candidate;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("design matrix construction", "[sikjalpha]") {
    SECTION("all-zero history gives S = 1 and zero columns") {
        RegionSeries zeros("Z", 1000, toy_sunday(), std::vector<double>(30, 0.0));
        SikjalphaConfig config;
        config.k = 2;
        config.bin_days = 3;
        config.mu = 0.01;
        const DesignMatrix design = build_design(zeros, config);
        CHECK(design.X.cwiseAbs().maxCoeff() == 0.0);
        CHECK(design.y.cwiseAbs().maxCoeff() == 0.0);
        CHECK(design.clamped_rows == 0);
    }
    SECTION("full depletion zeroes the row") {
        // Population 1000, mu = 0.1 -> capacity 100. Day 0 exhausts it.
        SikjalphaConfig config;
        config.k = 1;
        config.bin_days = 1;
        config.mu = 0.1;
        RegionSeries s("D", 1000, toy_sunday(), {100.0, 5.0, 5.0});
        const DesignMatrix design = build_design(s, config);
        CHECK(design.X(0, 0) == Catch::Approx(0.0));  // S(1) = 1 - 100/100 = 0
        CHECK(design.clamped_rows >= 1);              // later rows clamp below zero
    }
    SECTION("k=1, J=1 hand-unrolled lags") {
        SikjalphaConfig config;
        config.k = 1;
        config.bin_days = 1;
        config.mu = 0.5;
        RegionSeries s("H", 2000000000, toy_sunday(), {1.0, 2.0, 3.0, 4.0});
        const DesignMatrix design = build_design(s, config);
        REQUIRE(design.X.rows() == 3);
        CHECK(design.y(0) == Catch::Approx(2.0));
        CHECK(design.y(1) == Catch::Approx(3.0));
        CHECK(design.y(2) == Catch::Approx(4.0));
        CHECK(design.X(0, 0) == Catch::Approx(1.0).margin(1e-6));
        CHECK(design.X(1, 0) == Catch::Approx(2.0).margin(1e-6));
        CHECK(design.X(2, 0) == Catch::Approx(3.0).margin(1e-6));
    }
    SECTION("matches the brute-force lag builder on random series") {
        Rng rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            SikjalphaConfig config;
            config.k = 1 + static_cast<int>(rng.next_below(3));
            config.bin_days = 1 + static_cast<int>(rng.next_below(7));
            config.mu = 0.02;
            const int days = config.k * config.bin_days + 1 + static_cast<int>(rng.next_below(40));
            std::vector<double> values;
            for (int d = 0; d < days; ++d) values.push_back(rng.next_double() * 20.0);
            RegionSeries s("R", 50000, toy_sunday(), values);

            const DesignMatrix fast = build_design(s, config);
            const DesignMatrix slow = brute_force_design(s, config);
            REQUIRE(fast.X.rows() == slow.X.rows());
            CHECK((fast.X - slow.X).cwiseAbs().maxCoeff() < 1e-9);
            CHECK((fast.y - slow.y).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SECTION("insufficient history names required and available days") {
        SikjalphaConfig config;  // k=3, J=7 -> needs 22 days
        RegionSeries s("S", 1000, toy_sunday(), std::vector<double>(10, 1.0));
        CHECK_THROWS_WITH(build_design(s, config),
                          Catch::Matchers::ContainsSubstring("22") &&
                              Catch::Matchers::ContainsSubstring("10"));
    }
}

TEST_CASE("nnls agrees with support enumeration", "[sikjalpha]") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + static_cast<int>(rng.next_below(3));
        const int rows = k + 3 + static_cast<int>(rng.next_below(25));
        Eigen::MatrixXd A(rows, k);
        Eigen::VectorXd y(rows);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < k; ++c) A(r, c) = 0.1 + 1.9 * rng.next_double();
            y(r) = -2.0 + 6.0 * rng.next_double();
        }
        const Eigen::VectorXd fast = nnls(A, y);
        const Eigen::VectorXd slow = nnls_by_enumeration(A, y);
        CHECK((A * fast - y).squaredNorm() ==
              Catch::Approx((A * slow - y).squaredNorm()).margin(1e-8));
        CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(fast.minCoeff() >= 0.0);
    }
}

TEST_CASE("weighted fit", "[sikjalpha]") {
    SECTION("recovers exact nonnegative coefficients at alpha = 1") {
        Rng rng(31);
        for (int trial = 0; trial < 25; ++trial) {
            const int k = 1 + static_cast<int>(rng.next_below(3));
            const int rows = 40;
            Eigen::MatrixXd X(rows, k);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < k; ++c) X(r, c) = rng.next_double() * 3.0;
            Eigen::VectorXd truth(k);
            for (int c = 0; c < k; ++c) truth(c) = rng.next_double() * 2.0;
            const Eigen::VectorXd y = X * truth;
            const Eigen::VectorXd fitted = weighted_nnls(X, y, 1.0);
            CHECK((fitted - truth).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SECTION("zero target gives zero coefficients") {
        Eigen::MatrixXd X(5, 2);
        X.setConstant(1.0);
        CHECK(weighted_nnls(X, Eigen::VectorXd::Zero(5), 0.9).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("all-zero design falls back to a flat zero fit") {
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(5, 3);
        Eigen::VectorXd y(5);
        y.setConstant(4.0);
        CHECK(weighted_nnls(X, y, 1.0).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("objective never exceeds the zero-vector objective") {
        Rng rng(37);
        for (int trial = 0; trial < 50; ++trial) {
            const int k = 1 + static_cast<int>(rng.next_below(3));
            const int rows = 10 + static_cast<int>(rng.next_below(20));
            Eigen::MatrixXd X(rows, k);
            Eigen::VectorXd y(rows);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < k; ++c) X(r, c) = rng.next_double();
                y(r) = -1.0 + 3.0 * rng.next_double();
            }
            const double alpha = 0.85 + 0.15 * rng.next_double();
            const Eigen::VectorXd beta = weighted_nnls(X, y, alpha);
            CHECK(weighted_objective(X, y, alpha, beta) <=
                  weighted_objective(X, y, alpha, Eigen::VectorXd::Zero(k)) + 1e-9);
        }
    }
    SECTION("recent rows dominate under alpha < 1") {
        // Two regimes: early rows follow beta_early, late rows beta_late.
        const int rows = 12;
        Eigen::MatrixXd X(rows, 2);
        Eigen::VectorXd y(rows);
        Rng rng(43);
        Eigen::Vector2d beta_early(1.2, 0.1), beta_late(0.3, 0.9);
        for (int r = 0; r < rows; ++r) {
            X(r, 0) = 0.5 + rng.next_double();
            X(r, 1) = 0.5 + rng.next_double();
            y(r) = X.row(r).dot(r < rows / 2 ? beta_early : beta_late);
        }
        const double alpha = 0.75;

        const auto duplicated = [&](int which) {
            Eigen::MatrixXd X2(rows + 1, 2);
            Eigen::VectorXd y2(rows + 1);
            int out = 0;
            for (int r = 0; r < rows; ++r) {
                X2.row(out) = X.row(r);
                y2(out++) = y(r);
                if (r == which) {
                    X2.row(out) = X.row(r);
                    y2(out++) = y(r);
                }
            }
            return std::make_pair(X2, y2);
        };

        const Eigen::VectorXd base = weighted_nnls(X, y, alpha);
        const auto [Xe, ye] = duplicated(0);
        const auto [Xl, yl] = duplicated(rows - 1);
        const Eigen::VectorXd with_early = weighted_nnls(Xe, ye, alpha);
        const Eigen::VectorXd with_late = weighted_nnls(Xl, yl, alpha);

        // Squared error on the most recent third of the original rows.
        const auto recent_sse = [&](const Eigen::VectorXd& beta) {
            double total = 0.0;
            for (int r = 2 * rows / 3; r < rows; ++r) {
                const double d = y(r) - X.row(r).dot(beta);
                total += d * d;
            }
            return total;
        };
        const double base_sse = recent_sse(base);
        CHECK(std::abs(recent_sse(with_early) - base_sse) <
              std::abs(recent_sse(with_late) - base_sse));

        // Cross-check each solution against a dense grid search over beta.
        const auto grid_best = [](const Eigen::MatrixXd& Xg, const Eigen::VectorXd& yg,
                                  double a) {
            Eigen::Vector2d best(0.0, 0.0);
            double best_obj = weighted_objective(Xg, yg, a, best);
            for (double b0 = 0.0; b0 <= 1.5; b0 += 0.005) {
                for (double b1 = 0.0; b1 <= 1.5; b1 += 0.005) {
                    const Eigen::Vector2d candidate(b0, b1);
                    const double obj = weighted_objective(Xg, yg, a, candidate);
                    if (obj < best_obj) {
                        best_obj = obj;
                        best = candidate;
                    }
                }
            }
            return best;
        };
        CHECK((grid_best(X, y, alpha) - base).cwiseAbs().maxCoeff() < 0.01);
        CHECK((grid_best(Xe, ye, alpha) - with_early).cwiseAbs().maxCoeff() < 0.01);
        CHECK((grid_best(Xl, yl, alpha) - with_late).cwiseAbs().maxCoeff() < 0.01);
    }
}

TEST_CASE("coefficient confidence intervals", "[sikjalpha]") {
    Rng rng(53);
    const int rows = 60, k = 3;
    Eigen::MatrixXd X(rows, k);
    Eigen::VectorXd truth(k);
    truth << 0.8, 0.4, 0.2;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < k; ++c) X(r, c) = 0.2 + rng.next_double();

    SECTION("noiseless data collapses the interval") {
        const Eigen::VectorXd y = X * truth;
        const Eigen::VectorXd beta = weighted_nnls(X, y, 0.98);
        const BetaInterval ci = beta_confidence(X, y, 0.98, beta, 0.95);
        for (int i = 0; i < k; ++i) CHECK(ci.upper(i) - ci.lower(i) < 1e-6);
    }
    SECTION("estimate sits inside its interval; width grows with level") {
        Eigen::VectorXd y = X * truth;
        for (int r = 0; r < rows; ++r) y(r) += 0.3 * (rng.next_double() - 0.5);
        const Eigen::VectorXd beta = weighted_nnls(X, y, 0.98);
        const BetaInterval wide = beta_confidence(X, y, 0.98, beta, 0.95);
        const BetaInterval narrow = beta_confidence(X, y, 0.98, beta, 0.50);
        for (int i = 0; i < k; ++i) {
            CHECK(wide.lower(i) <= beta(i) + 1e-12);
            CHECK(beta(i) <= wide.upper(i) + 1e-12);
            CHECK(wide.upper(i) - wide.lower(i) >= narrow.upper(i) - narrow.lower(i) - 1e-12);
            CHECK(wide.lower(i) >= 0.0);
        }
    }
    SECTION("singular normal matrix collapses to the point estimate") {
        Eigen::MatrixXd Xs(rows, 2);
        for (int r = 0; r < rows; ++r) {
            Xs(r, 0) = 1.0 + 0.01 * r;
            Xs(r, 1) = Xs(r, 0);  // exact duplicate column
        }
        Eigen::VectorXd y = Xs.col(0) * 2.0;
        for (int r = 0; r < rows; ++r) y(r) += 0.1 * (rng.next_double() - 0.5);
        const Eigen::VectorXd beta = weighted_nnls(Xs, y, 1.0);
        const BetaInterval ci = beta_confidence(Xs, y, 1.0, beta, 0.95);
        for (int i = 0; i < 2; ++i) {
            CHECK(ci.lower(i) == Catch::Approx(beta(i)));
            CHECK(ci.upper(i) == Catch::Approx(beta(i)));
        }
    }
}

TEST_CASE("daily forecasting", "[sikjalpha]") {
    SECTION("zero rates give a dead forecast") {
        SikjalphaConfig config;
        RegionSeries s("Z", 100000, toy_sunday(),
                       flucast::testing::epidemic_curve(40, 20.0, 20, 8.0));
        SikjalphaFit fit;
        fit.config = config;
        fit.betas = Eigen::VectorXd::Zero(config.k);
        for (const double v : forecast_daily(fit, s, 28)) CHECK(v == 0.0);
    }
    SECTION("unit rate holds a constant series fixed") {
        SikjalphaConfig config;
        config.k = 1;
        config.bin_days = 1;
        config.mu = 0.5;
        SikjalphaFit fit;
        fit.config = config;
        fit.betas = Eigen::VectorXd::Ones(1);
        const double c = 3.5;
        RegionSeries s("C", 2000000000, toy_sunday(), std::vector<double>(10, c));
        for (const double v : forecast_daily(fit, s, 28)) CHECK(v == Catch::Approx(c));
    }
    SECTION("forecasts stay nonnegative and below capacity for random fits") {
        Rng rng(61);
        for (int trial = 0; trial < 50; ++trial) {
            SikjalphaConfig config;
            config.k = 1 + static_cast<int>(rng.next_below(3));
            config.bin_days = 1 + static_cast<int>(rng.next_below(7));
            config.mu = 0.005 + 0.02 * rng.next_double();
            const std::int64_t population = 20000 + static_cast<std::int64_t>(rng.next_below(100000));

            SikjalphaFit fit;
            fit.config = config;
            fit.betas = Eigen::VectorXd(config.k);
            for (int i = 0; i < config.k; ++i) fit.betas(i) = 2.0 * rng.next_double();

            std::vector<double> history;
            double observed_total = 0.0;
            for (int d = 0; d < 40; ++d) {
                history.push_back(rng.next_double() * 30.0);
                observed_total += history.back();
            }
            RegionSeries s("P", population, toy_sunday(), history);
            const auto forecast = forecast_daily(fit, s, 56);
            double cumulative = observed_total;
            const double capacity = config.mu * static_cast<double>(population);
            for (const double v : forecast) {
                CHECK(v >= 0.0);
                cumulative += v;
            }
            CHECK(cumulative <= std::max(observed_total, capacity) + 1e-9);
        }
    }
}

TEST_CASE("round trip: simulated data refits to the generating rates", "[sikjalpha]") {
    const std::vector<double> truth{0.55, 0.30, 0.12};
    const RegionSeries sim = simulate_sikjalpha(truth, 1.0 / 100.0, 10000000, 160, {5.0});
    SikjalphaConfig config;
    config.k = 3;
    config.bin_days = 7;
    config.mu = 1.0 / 100.0;
    config.alpha = 1.0;
    const SikjalphaFit fit = fit_sikjalpha(sim, config);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(fit.betas(i) - truth[static_cast<std::size_t>(i)]) /
                  truth[static_cast<std::size_t>(i)] <
              1e-6);
}

TEST_CASE("lagged rate selection trains on week-old data", "[sikjalpha]") {
    const RegionSeries series("L", 500000, toy_sunday(),
                              flucast::testing::epidemic_curve(70, 40.0, 35, 12.0));
    SikjalphaConfig lagged;
    lagged.lambda_lag = 7;
    lagged.alpha = 0.95;
    const SikjalphaFit fit = fit_sikjalpha(series, lagged);
    CHECK(fit.train_end == series.end_date());

    SikjalphaConfig current = lagged;
    current.lambda_lag = 0;
    const RegionSeries shorter = series.truncated_before(series.end_date() - Days{6});
    const SikjalphaFit reference = fit_sikjalpha(shorter, current);
    CHECK((fit.betas - reference.betas).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(fit.cumulative_hosp_at_end >
          reference.cumulative_hosp_at_end);  // lagged fit still rolls from full history
}
