#pragma once

// Growth of the Taylor coefficients of <a+a>_n: log-linear fit, radius
// estimate, root test, and comparison of partial sums against truncated-basis
// numerics.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "squeezelab/boson_algebra.hpp"
#include "squeezelab/errors.hpp"
#include "squeezelab/evolve.hpp"

namespace squeezelab {

struct FitResult {
    unsigned n = 0;
    std::vector<unsigned> points_used;
    double alpha = 0.0;         // slope of ln c_m against m
    double alpha_stderr = 0.0;  // OLS standard error of the slope
    double intercept = 0.0;
    double radius = 0.0;        // exp(-alpha)
};

/// Ordinary least squares of ln c against m.
inline FitResult fit_log_linear(unsigned n, const std::vector<unsigned>& m, const std::vector<double>& log_c) {
    if (m.size() != log_c.size()) throw InvalidArgument("fit_log_linear: size mismatch");
    if (m.size() < 2) throw InvalidArgument("fit_log_linear: need at least 2 points");
    const double k = static_cast<double>(m.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        mean_x += m[i];
        mean_y += log_c[i];
    }
    mean_x /= k;
    mean_y /= k;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double dx = m[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (log_c[i] - mean_y);
    }
    if (sxx == 0.0) throw InvalidArgument("fit_log_linear: all m values coincide");

    FitResult fit;
    fit.n = n;
    fit.points_used = m;
    fit.alpha = sxy / sxx;
    fit.intercept = mean_y - fit.alpha * mean_x;
    fit.radius = std::exp(-fit.alpha);
    if (m.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double resid = log_c[i] - (fit.intercept + fit.alpha * m[i]);
            ssr += resid * resid;
        }
        fit.alpha_stderr = std::sqrt(ssr / (k - 2.0) / sxx);
    }
    return fit;
}

/// Fits ln c_m = alpha m + b over the last `last_points` non-zero
/// coefficients. Selected coefficients must be positive.
inline FitResult fit_exponential(const CoefficientSeries& series, std::size_t last_points = 5) {
    if (last_points < 2) throw InvalidArgument("fit_exponential: window must hold at least 2 points");
    std::vector<SeriesEntry> nonzero;
    for (const auto& e : series.entries) {
        if (e.m >= 1 && e.c != 0) nonzero.push_back(e);
    }
    if (nonzero.size() < last_points) {
        throw InvalidArgument("fit_exponential: series has " + std::to_string(nonzero.size()) +
                              " non-zero coefficients, window needs " + std::to_string(last_points));
    }
    std::vector<unsigned> m;
    std::vector<double> log_c;
    for (std::size_t i = nonzero.size() - last_points; i < nonzero.size(); ++i) {
        if (nonzero[i].c < 0) {
            throw InvalidArgument("fit_exponential: coefficient at m=" + std::to_string(nonzero[i].m) +
                                  " is negative; logarithm undefined");
        }
        m.push_back(nonzero[i].m);
        log_c.push_back(log_abs(nonzero[i].c));
    }
    return fit_log_linear(series.n, m, log_c);
}

struct RootTestPoint {
    unsigned m = 0;
    double value = 0.0;  // |c_m|^(1/m)
};

inline std::vector<RootTestPoint> root_test_sequence(const CoefficientSeries& series) {
    std::vector<RootTestPoint> out;
    for (const auto& e : series.entries) {
        if (e.m == 0) continue;
        out.push_back({e.m, e.c == 0 ? 0.0 : std::exp(log_abs(e.c) / e.m)});
    }
    return out;
}

struct ComparisonRow {
    double r = 0.0;
    double numeric_n = 0.0;
    double numeric_nprime = 0.0;
    double taylor = 0.0;
    double diff_num = 0.0;     // |numeric_N - numeric_N'|
    double diff_taylor = 0.0;  // max over both truncations of |numeric - taylor|
    bool converged = false;
};

struct ComparisonTable {
    unsigned n = 0;
    std::size_t truncation = 0;
    std::size_t truncation_prime = 0;
    unsigned max_order = 0;
    double agree_tol = 0.0;
    std::vector<ComparisonRow> rows;

    /// First r where the two truncations differ by more than agree_tol.
    std::optional<double> first_numeric_disagreement() const {
        for (const auto& row : rows) {
            if (!(row.diff_num <= agree_tol)) return row.r;
        }
        return std::nullopt;
    }

    /// First r where any of the three approximations disagree.
    std::optional<double> first_unconverged() const {
        for (const auto& row : rows) {
            if (!row.converged) return row.r;
        }
        return std::nullopt;
    }
};

/// Numeric <a+a> at two truncations against the Taylor partial sum of
/// `series`, row by row. Rows whose evolution failed compare as NaN and are
/// never converged.
inline ComparisonTable compare_taylor_numeric(const CoefficientSeries& series, std::size_t n_a, std::size_t n_b,
                                              const std::vector<double>& r_grid, double agree_tol,
                                              const SweepOptions& opts = {}) {
    if (n_a == n_b) throw InvalidArgument("compare_taylor_numeric: the two truncations must differ");
    if (!(agree_tol > 0.0)) throw InvalidArgument("compare_taylor_numeric: agree_tol must be positive");
    const auto sweep = sweep_photon_number(series.n, r_grid, {n_a, n_b}, opts);
    const auto a = sweep.curve(n_a);
    const auto b = sweep.curve(n_b);

    ComparisonTable table;
    table.n = series.n;
    table.truncation = n_a;
    table.truncation_prime = n_b;
    table.max_order = series.max_order();
    table.agree_tol = agree_tol;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        ComparisonRow row;
        row.r = r_grid[i];
        row.numeric_n = a[i].mean_photon;
        row.numeric_nprime = b[i].mean_photon;
        row.taylor = taylor_partial_sum(series, row.r);
        row.diff_num = std::abs(row.numeric_n - row.numeric_nprime);
        row.diff_taylor = std::max(std::abs(row.numeric_n - row.taylor), std::abs(row.numeric_nprime - row.taylor));
        row.converged = a[i].status == RowStatus::ok && b[i].status == RowStatus::ok && row.diff_num <= agree_tol &&
                        row.diff_taylor <= agree_tol;
        table.rows.push_back(row);
    }
    return table;
}

/// As above with the series computed through its M-th even power.
inline ComparisonTable compare_taylor_numeric(unsigned n, std::size_t n_a, std::size_t n_b, unsigned M,
                                              const std::vector<double>& r_grid, double agree_tol,
                                              const SweepOptions& opts = {}) {
    return compare_taylor_numeric(coefficients(n, M), n_a, n_b, r_grid, agree_tol, opts);
}

}  // namespace squeezelab
