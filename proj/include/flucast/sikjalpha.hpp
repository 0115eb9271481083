#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "flucast/common.hpp"
#include "flucast/region_series.hpp"

namespace flucast {

// Hyperparameters of the discrete heterogeneous-rate hospitalization model:
// past dependence is binned into k windows of bin_days days, fitting weights
// decay as alpha^(T-t), lambda_lag selects whether projected rates come from
// the current fit (0) or one trained a week earlier (7), and mu is the
// hospitalization-to-infection ratio entering the susceptible fraction.
struct SikjalphaConfig {
    int k = 3;
    int bin_days = 7;  // J
    double alpha = 1.0;
    int lambda_lag = 0;  // days, 0 or 7
    double mu = 1.0 / 100.0;

    void validate() const {
        if (k < 1) throw InvalidConfigError("sikjalpha: k must be >= 1");
        if (bin_days < 1) throw InvalidConfigError("sikjalpha: bin width must be >= 1");
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw InvalidConfigError("sikjalpha: alpha must be in (0, 1]");
        if (!(mu > 0.0 && mu < 1.0)) throw InvalidConfigError("sikjalpha: mu must be in (0, 1)");
        if (lambda_lag != 0 && lambda_lag != 7)
            throw InvalidConfigError("sikjalpha: lambda lag must be 0 or 7");
    }
};

struct SikjalphaFit {
    Eigen::VectorXd betas;  // length k, all >= 0
    SikjalphaConfig config;
    Date train_end{};                  // last observed day the forecast rolls from
    double cumulative_hosp_at_end = 0.0;
};

struct BetaInterval {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

struct DesignMatrix {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    int clamped_rows = 0;  // rows where cumulative hospitalizations exceeded mu*N
};

namespace detail {

// Cumulative hospitalizations strictly before day index t (0-based), i.e.
// H[t] = sum of incident values on days 0..t-1, with H[0] = 0. Lag indices
// before the series start count as 0 (no history before the first day).
inline std::vector<double> cumulative_before(const std::vector<double>& incident) {
    std::vector<double> cum(incident.size() + 1, 0.0);
    for (std::size_t i = 0; i < incident.size(); ++i) cum[i + 1] = cum[i] + incident[i];
    return cum;
}

inline double lagged_cumulative(const std::vector<double>& cum, long index) {
    if (index <= 0) return 0.0;
    if (index >= static_cast<long>(cum.size())) index = static_cast<long>(cum.size()) - 1;
    return cum[static_cast<std::size_t>(index)];
}

}  // namespace detail

// Build the regression system: row t (for every day whose k lagged bins are
// observed) has entries
//   X[t][i] = S(t) * (H(t-(i-1)J) - H(t-iJ)),   i = 1..k
//   y[t]    = incident hospitalizations on day t
// with S(t) = 1 - H(t)/(mu*N) and H the cumulative count strictly before t.
// S is clamped to [0, 1]; rows needing the lower clamp are counted in
// `clamped_rows`.
inline DesignMatrix build_design(const RegionSeries& series, const SikjalphaConfig& config) {
    config.validate();
    const long total_days = static_cast<long>(series.size());
    const long window = static_cast<long>(config.k) * config.bin_days;
    if (total_days < window + 1)
        throw InsufficientDataError(
            "region " + series.region_id() + ": need at least " + std::to_string(window + 1) +
            " days to fit (k*J + 1), have " + std::to_string(total_days));

    const auto cum = detail::cumulative_before(series.values());
    const double mu_n = config.mu * static_cast<double>(series.population());

    const long first_row = window;            // 0-based day index of the first usable row
    const long n_rows = total_days - window;  // rows first_row .. total_days-1

    DesignMatrix design;
    design.X.resize(n_rows, config.k);
    design.y.resize(n_rows);
    for (long t = first_row; t < total_days; ++t) {
        double susceptible = 1.0 - detail::lagged_cumulative(cum, t) / mu_n;
        if (susceptible < 0.0) {
            susceptible = 0.0;
            ++design.clamped_rows;
        } else if (susceptible > 1.0) {
            susceptible = 1.0;
        }
        for (int i = 1; i <= config.k; ++i) {
            const double newer = detail::lagged_cumulative(cum, t - static_cast<long>(i - 1) * config.bin_days);
            const double older = detail::lagged_cumulative(cum, t - static_cast<long>(i) * config.bin_days);
            design.X(t - first_row, i - 1) = susceptible * (newer - older);
        }
        design.y(t - first_row) = series.value(static_cast<std::size_t>(t));
    }
    return design;
}

// Lawson–Hanson active-set solver for min ||A b - y||^2 subject to b >= 0.
// The passive-set least-squares subproblems are solved by QR. Problems here
// are tiny (k columns), so the classic algorithm is plenty.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                            double tolerance = 1e-12) {
    const auto n = A.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);

    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff());
    const double tol = tolerance * scale;

    Eigen::VectorXd gradient = A.transpose() * (y - A * x);
    const int max_outer = 3 * static_cast<int>(n) + 30;
    for (int outer = 0; outer < max_outer; ++outer) {
        // Most-violating zero coordinate with positive gradient enters.
        int enter = -1;
        double best = tol;
        for (int j = 0; j < n; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && gradient(j) > best) {
                best = gradient(j);
                enter = j;
            }
        }
        if (enter < 0) break;
        passive[static_cast<std::size_t>(enter)] = true;

        for (int inner = 0; inner < max_outer; ++inner) {
            // Solve the unconstrained problem on the passive set.
            std::vector<int> idx;
            for (int j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
            Eigen::MatrixXd Ap(A.rows(), static_cast<long>(idx.size()));
            for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<long>(c)) = A.col(idx[c]);
            const Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(y);

            double min_z = z.size() ? z.minCoeff() : 1.0;
            if (min_z > 0.0) {
                x.setZero();
                for (std::size_t c = 0; c < idx.size(); ++c) x(idx[c]) = z(static_cast<long>(c));
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            double step = 1.0;
            for (std::size_t c = 0; c < idx.size(); ++c) {
                if (z(static_cast<long>(c)) <= 0.0) {
                    const double xc = x(idx[c]);
                    const double denom = xc - z(static_cast<long>(c));
                    if (denom > 0.0) step = std::min(step, xc / denom);
                }
            }
            for (std::size_t c = 0; c < idx.size(); ++c) {
                const double moved = x(idx[c]) + step * (z(static_cast<long>(c)) - x(idx[c]));
                x(idx[c]) = moved;
                if (moved <= tolerance) {
                    x(idx[c]) = 0.0;
                    passive[static_cast<std::size_t>(idx[c])] = false;
                }
            }
        }
        gradient = A.transpose() * (y - A * x);
    }
    return x.cwiseMax(0.0);
}

// Weighted nonnegative least squares: minimizes
//   sum_t alpha^(T-t) (y_t - X_t . beta)^2,  beta >= 0,
// realized by scaling row t of (X, y) by alpha^((T-t)/2) and running NNLS.
// An all-zero X short-circuits to beta = 0 (flat forecast).
inline Eigen::VectorXd weighted_nnls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     double alpha) {
    if (X.rows() == 0 || X.rows() != y.size())
        throw InvalidDataError("weighted_nnls: empty system or row mismatch");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw InvalidConfigError("weighted_nnls: alpha must be in (0, 1]");
    if (X.cwiseAbs().maxCoeff() == 0.0) return Eigen::VectorXd::Zero(X.cols());

    const auto rows = X.rows();
    Eigen::MatrixXd Xw = X;
    Eigen::VectorXd yw = y;
    for (long t = 0; t < rows; ++t) {
        const double w = std::pow(alpha, static_cast<double>(rows - 1 - t) / 2.0);
        Xw.row(t) *= w;
        yw(t) *= w;
    }
    return nnls(Xw, yw);
}

// Fit on a series; with lambda_lag = 7 the rates come from a fit whose data
// ends a week earlier, while train_end still points at the true series end so
// forecasts roll forward from all observed data.
inline SikjalphaFit fit_sikjalpha(const RegionSeries& series, const SikjalphaConfig& config) {
    config.validate();
    const RegionSeries* fit_series = &series;
    RegionSeries truncated = series;
    if (config.lambda_lag > 0) {
        if (series.empty())
            throw InsufficientDataError("region " + series.region_id() + ": empty series");
        truncated = series.truncated_before(series.end_date() + Days{1} - Days{config.lambda_lag});
        fit_series = &truncated;
    }
    const DesignMatrix design = build_design(*fit_series, config);
    SikjalphaFit fit;
    fit.betas = weighted_nnls(design.X, design.y, config.alpha);
    fit.config = config;
    fit.train_end = series.end_date();
    const auto cum = detail::cumulative_before(series.values());
    fit.cumulative_hosp_at_end = cum.back();
    return fit;
}

// Large-sample per-coefficient intervals from the weighted regression:
// Cov(beta) = sigma^2 (X'WX)^-1 with sigma^2 the weighted residual variance.
// Lower bounds are clamped to zero; a singular normal matrix (or too few
// rows) collapses intervals to the point estimate.
inline BetaInterval beta_confidence(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    double alpha, const Eigen::VectorXd& betas, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw InvalidConfigError("beta_confidence: level must be in (0, 1)");
    const auto rows = X.rows();
    const auto cols = X.cols();
    BetaInterval interval{betas.cwiseMax(0.0), betas.cwiseMax(0.0)};
    if (rows <= cols) return interval;

    Eigen::VectorXd weights(rows);
    for (long t = 0; t < rows; ++t)
        weights(t) = std::pow(alpha, static_cast<double>(rows - 1 - t));

    const Eigen::MatrixXd normal = X.transpose() * weights.asDiagonal() * X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    if (!lu.isInvertible()) return interval;

    const Eigen::VectorXd residuals = y - X * betas;
    const double sigma2 = (weights.array() * residuals.array().square()).sum() /
                          static_cast<double>(rows - cols);
    const Eigen::MatrixXd covariance = sigma2 * lu.inverse();
    const double z = normal_quantile(0.5 + level / 2.0);
    for (long i = 0; i < cols; ++i) {
        const double se = std::sqrt(std::max(0.0, covariance(i, i)));
        interval.lower(i) = std::max(0.0, betas(i) - z * se);
        interval.upper(i) = betas(i) + z * se;
    }
    return interval;
}

// Recursive daily forecast: roll the model forward from the end of `series`
// for `horizon_days` days, updating the susceptible fraction from the running
// cumulative count. Negative increments clamp to zero, and each increment is
// capped at the remaining capacity so the cumulative count cannot pass mu*N.
inline std::vector<double> forecast_daily(const SikjalphaFit& fit, const RegionSeries& series,
                                          int horizon_days) {
    if (horizon_days < 1)
        throw InvalidConfigError("forecast_daily: horizon must be >= 1 day");
    const auto& config = fit.config;
    const long observed = static_cast<long>(series.size());
    const double mu_n = config.mu * static_cast<double>(series.population());

    // Extended cumulative-before array over observed + forecast days.
    std::vector<double> cum = detail::cumulative_before(series.values());
    cum.reserve(cum.size() + static_cast<std::size_t>(horizon_days));

    std::vector<double> incident(series.values());
    incident.reserve(incident.size() + static_cast<std::size_t>(horizon_days));

    std::vector<double> forecast;
    forecast.reserve(static_cast<std::size_t>(horizon_days));
    for (long step = 0; step < horizon_days; ++step) {
        const long t = observed + step;
        const double susceptible =
            std::clamp(1.0 - detail::lagged_cumulative(cum, t) / mu_n, 0.0, 1.0);
        double delta = 0.0;
        for (int i = 1; i <= config.k; ++i) {
            const double newer = detail::lagged_cumulative(cum, t - static_cast<long>(i - 1) * config.bin_days);
            const double older = detail::lagged_cumulative(cum, t - static_cast<long>(i) * config.bin_days);
            delta += fit.betas(i - 1) * (newer - older);
        }
        delta = std::max(0.0, susceptible * delta);
        delta = std::min(delta, std::max(0.0, mu_n - cum.back()));
        forecast.push_back(delta);
        incident.push_back(delta);
        cum.push_back(cum.back() + delta);
    }
    return forecast;
}

}  // namespace flucast
