#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flucast {

// Error hierarchy. Every failure surfaced by the library derives from Error
// so callers can catch broadly or on the specific category.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (bad dates, negative counts, ...).
struct InvalidDataError : Error {
    using Error::Error;
};

// A series is too short for the requested operation.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Bad configuration values (zero population, empty grids, ...).
struct InvalidConfigError : Error {
    using Error::Error;
};

// Filesystem / parse failures with file context.
struct IoError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic seeding helpers.
//
// All randomized components (bootstrap resampling, per-node feature
// subsampling, trajectory sampling) consume an explicit 64-bit seed. Streams
// for sub-tasks (tree i of a forest, horizon x of a pipeline) are derived
// with splitmix64 so results are reproducible bit-for-bit and independent of
// evaluation order.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for sub-stream `stream` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 1));
}

// FNV-1a, for deriving stable per-key streams from string identifiers.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (const char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

// Small self-contained generator (xoshiro-free: mt19937_64 kept behind our own
// uniform mappings so output bytes do not depend on library distribution
// internals).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0xD1B54A32D192ED03ULL)) {
        if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
    }

    std::uint64_t next_u64() {
        // xorshift64* — tiny, fast, and fully specified here.
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1DULL;
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform in [lo, hi].
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    std::uint64_t state_;
};

// Draw `m` distinct indices from [0, n), returned in ascending order.
inline std::vector<int> sample_without_replacement(Rng& rng, int n, int m) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    m = std::min(m, n);
    for (int i = 0; i < m; ++i) {
        const auto j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(m));
    std::sort(pool.begin(), pool.end());
    return pool;
}

// ---------------------------------------------------------------------------
// Dense row-major matrix used by the tree-ensemble code. The model-fitting
// side (design matrices) uses Eigen; trees only ever need row views.
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) {
        return {data_.data() + r * cols_, cols_};
    }

    void push_row(std::span<const double> values) {
        if (rows_ == 0 && cols_ == 0) cols_ = values.size();
        if (values.size() != cols_)
            throw InvalidDataError("DataMatrix::push_row: expected " + std::to_string(cols_) +
                                   " columns, got " + std::to_string(values.size()));
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Numeric helpers.

// Empirical quantile with linear interpolation between order statistics
// (the same convention for tree outputs and sampled trajectories, so the
// 23-level extraction is pinned to one method).
inline double empirical_quantile(std::span<const double> sorted_values, double level) {
    if (sorted_values.empty())
        throw InvalidDataError("empirical_quantile: empty sample");
    const std::size_t n = sorted_values.size();
    if (n == 1) return sorted_values[0];
    const double h = static_cast<double>(n - 1) * level;
    const auto lo = static_cast<std::size_t>(std::clamp(std::floor(h), 0.0, static_cast<double>(n - 1)));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

inline std::vector<double> empirical_quantiles(std::vector<double> values,
                                               std::span<const double> levels) {
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(levels.size());
    for (const double q : levels)
        out.push_back(empirical_quantile(values, q));
    return out;
}

// Inverse of the standard normal CDF (Acklam's rational approximation,
// |relative error| < 1.2e-9 over (0, 1)).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw InvalidConfigError("normal_quantile: p must be in (0, 1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

    constexpr double p_low = 0.02425;
    double q, r;
    if (p < p_low) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        q = p - 0.5;
        r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

inline double mean_of(std::span<const double> v) {
    if (v.empty()) throw InvalidDataError("mean_of: empty range");
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace flucast
