#pragma once

// Squeezed states U_n(r)|0> on truncated bases, photon-number observables,
// truncation sweeps, and convergence diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "squeezelab/errors.hpp"
#include "squeezelab/fock.hpp"
#include "squeezelab/krylov.hpp"

namespace squeezelab {

/// <a+a> = sum_m m |v_m|^2.
template <typename Scalar>
double mean_photon(const StateVector<Scalar>& v) {
    double s = 0.0;
    for (std::size_t m = 1; m < v.size(); ++m) s += static_cast<double>(m) * v.probability(m);
    return s;
}

/// sum_m op_mm |v_m|^2 for a diagonal operator.
template <typename OpScalar, typename Scalar>
double expectation_diagonal(const BandedOperator<OpScalar>& op, const StateVector<Scalar>& v) {
    if (!op.is_diagonal()) throw InvalidArgument("expectation_diagonal: operator is not diagonal");
    if (op.size() != v.size()) throw InvalidArgument("expectation_diagonal: dimension mismatch");
    const auto diag = op.main_diagonal();
    double s = 0.0;
    for (std::size_t m = 0; m < v.size(); ++m) s += std::real(diag[m]) * v.probability(m);
    return s;
}

/// Probability weight in the top `tail` levels.
template <typename Scalar>
double leakage(const StateVector<Scalar>& v, std::size_t tail) {
    if (tail < 1 || tail >= v.size()) {
        throw InvalidArgument("leakage: tail must satisfy 1 <= tail < N (tail=" + std::to_string(tail) +
                              ", N=" + std::to_string(v.size()) + ")");
    }
    double s = 0.0;
    for (std::size_t m = v.size() - tail; m < v.size(); ++m) s += v.probability(m);
    return s;
}

inline std::size_t default_tail(unsigned n) { return std::max<std::size_t>(10, 2 * static_cast<std::size_t>(n)); }

inline constexpr double default_leak_tol = 1e-10;

/// |r_n> = exp(r a+^n - r a^n)|0> for real r; negative r is the phase-pi state.
inline StateVector<double> squeezed_state_real(unsigned n, double r, FockDim dim, const ExpOptions& opts) {
    const RealOperator k = generator_real(n, r, dim);
    return apply_exp_generator(k, StateVector<double>::vacuum(dim), opts);
}

/// |r_n> = U_n(r)|0> for complex r. Real r takes the real-arithmetic path.
inline StateVector<cplx> squeezed_state(const SqueezeParams& params, FockDim dim, const ExpOptions& opts) {
    require_order_fits(params.n, dim);
    if (params.is_real()) return squeezed_state_real(params.n, params.r.real(), dim, opts).to_complex();
    return apply_exp_generator(generator(params, dim), StateVector<cplx>::vacuum(dim), opts);
}

inline StateVector<cplx> squeezed_state(const SqueezeParams& params, FockDim dim, double tol) {
    ExpOptions opts;
    opts.tol = tol;
    return squeezed_state(params, dim, opts);
}

enum class RowStatus { ok, failed };

struct SweepRow {
    std::size_t N = 0;
    double r = 0.0;
    double mean_photon = 0.0;
    double leakage = 0.0;
    double norm_error = 0.0;
    RowStatus status = RowStatus::ok;
    std::string message;
};

struct SweepResult {
    unsigned n = 0;
    std::vector<SweepRow> rows;  // sorted by (N, r)

    std::size_t failed_rows() const {
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [](const SweepRow& row) { return row.status == RowStatus::failed; }));
    }

    /// Rows for one truncation, in r order.
    std::vector<SweepRow> curve(std::size_t N) const {
        std::vector<SweepRow> out;
        for (const auto& row : rows) {
            if (row.N == N) out.push_back(row);
        }
        return out;
    }
};

struct SweepOptions {
    ExpOptions exp;
    std::optional<std::size_t> tail;  // default_tail(n) when unset
    unsigned threads = 1;
};

namespace detail {

inline void require_ascending(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw InvalidArgument(std::string(what) + ": r grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < 0.0) {
            throw InvalidArgument(std::string(what) + ": r values must be finite and >= 0");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw InvalidArgument(std::string(what) + ": r grid must be strictly ascending");
        }
    }
}

// One truncation, every r. exp(r K_1) for K_1 = a+^n - a^n is stepped along
// the grid since exp(r' K_1) = exp((r' - r) K_1) exp(r K_1). After a failed
// row the next row restarts from the vacuum.
inline std::vector<SweepRow> sweep_one_truncation(unsigned n, std::size_t N, const std::vector<double>& r_grid,
                                                  const SweepOptions& opts) {
    const FockDim dim(N);
    const std::size_t tail = opts.tail.value_or(default_tail(n));
    const RealOperator k1 = generator_real(n, 1.0, dim);
    std::vector<SweepRow> rows;
    rows.reserve(r_grid.size());

    StateVector<double> state = StateVector<double>::vacuum(dim);
    double state_r = 0.0;
    bool have_state = true;
    for (const double r : r_grid) {
        SweepRow row;
        row.N = N;
        row.r = r;
        try {
            if (!have_state) {
                state = StateVector<double>::vacuum(dim);
                state_r = 0.0;
            }
            state = apply_exp_generator(k1, state, opts.exp, r - state_r);
            state_r = r;
            have_state = true;
            row.mean_photon = mean_photon(state);
            row.leakage = leakage(state, std::min(tail, N - 1));
            row.norm_error = std::abs(state.norm() - 1.0);
        } catch (const ConvergenceError& e) {
            have_state = false;
            row.status = RowStatus::failed;
            row.message = e.what();
            row.mean_photon = std::numeric_limits<double>::quiet_NaN();
            row.leakage = std::numeric_limits<double>::quiet_NaN();
            row.norm_error = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

/// <a+a> over an r grid for each truncation N. Failed evolutions are
/// recorded in their rows; the sweep continues.
inline SweepResult sweep_photon_number(unsigned n, const std::vector<double>& r_grid, std::vector<std::size_t> n_list,
                                       const SweepOptions& opts = {}) {
    if (n < 1) throw InvalidArgument("sweep_photon_number: order must be >= 1");
    detail::require_ascending(r_grid, "sweep_photon_number");
    if (n_list.empty()) throw InvalidArgument("sweep_photon_number: N list is empty");
    std::sort(n_list.begin(), n_list.end());
    n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
    for (const auto N : n_list) require_order_fits(n, FockDim(N));

    std::vector<std::vector<SweepRow>> per_n(n_list.size());
    const unsigned threads = std::max(1U, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_list.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            per_n[i] = detail::sweep_one_truncation(n, n_list[i], r_grid, opts);
        }
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < n_list.size(); i += threads) {
                        per_n[i] = detail::sweep_one_truncation(n, n_list[i], r_grid, opts);
                    }
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    SweepResult result;
    result.n = n;
    for (auto& rows : per_n) {
        for (auto& row : rows) result.rows.push_back(std::move(row));
    }
    return result;
}

struct SecondDerivativeCheck {
    double fd = 0.0;
    double analytic = 0.0;
    double max_leakage = 0.0;
    bool converged = true;

    double relative_difference() const { return std::abs(fd - analytic) / std::abs(analytic); }
};

/// Central second difference of <a+a> at r against 2n <r_n|[a^n, a+^n]|r_n>.
///
/// The three states are evolved independently from the vacuum. r - h may be
/// negative; U_n(-h)|0> is the phase-pi state and has the same <a+a>.
/// `converged` is false when any of the three states leaks more than
/// `leak_tol` into the top default_tail(n) levels.
inline SecondDerivativeCheck second_derivative_check(unsigned n, double r, FockDim dim, double h,
                                                     const ExpOptions& opts, double leak_tol = default_leak_tol) {
    if (!(h > 0.0)) throw InvalidArgument("second_derivative_check: h must be positive");
    require_order_fits(n, dim);
    const std::size_t tail = std::min(default_tail(n), dim.size() - 1);

    SecondDerivativeCheck out;
    double f[3];
    const double points[3] = {r - h, r, r + h};
    StateVector<double> centre(dim);
    for (int i = 0; i < 3; ++i) {
        auto state = squeezed_state_real(n, points[i], dim, opts);
        f[i] = mean_photon(state);
        out.max_leakage = std::max(out.max_leakage, leakage(state, tail));
        if (i == 1) centre = std::move(state);
    }
    out.fd = (f[2] - 2.0 * f[1] + f[0]) / (h * h);
    out.analytic = 2.0 * n * expectation_diagonal(a_n_commutator_closed_form(n, dim), centre);
    out.converged = out.max_leakage < leak_tol;
    return out;
}

/// The generator couples only levels that differ by multiples of n, so from
/// the vacuum a truncation of N levels reaches 0, n, ..., n*floor((N-1)/n).
/// Two truncations give identical states unless that top level differs.
inline bool truncations_distinguishable(unsigned n, std::size_t n_a, std::size_t n_b) {
    if (n < 1 || n_a < 1 || n_b < 1) throw InvalidArgument("truncations_distinguishable: arguments must be >= 1");
    return (n_a - 1) / n != (n_b - 1) / n;
}

inline double relative_difference(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Largest grid r such that every r' <= r has leakage < leak_tol at both
/// truncations and relative <a+a> difference < agree_tol. Returns 0 when no
/// grid point qualifies.
inline double converged_region(const SweepResult& sweep, std::size_t n_a, std::size_t n_b, double leak_tol,
                               double agree_tol) {
    const auto a = sweep.curve(n_a);
    const auto b = sweep.curve(n_b);
    if (a.size() != b.size() || a.empty()) {
        throw InvalidArgument("converged_region: sweep lacks matching curves for the N pair");
    }
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool ok = a[i].status == RowStatus::ok && b[i].status == RowStatus::ok && a[i].leakage < leak_tol &&
                        b[i].leakage < leak_tol && relative_difference(a[i].mean_photon, b[i].mean_photon) < agree_tol;
        if (!ok) break;
        best = a[i].r;
    }
    return best;
}

inline double converged_region(unsigned n, std::size_t n_a, std::size_t n_b, const std::vector<double>& r_grid,
                               double leak_tol, double agree_tol, const SweepOptions& opts = {}) {
    if (n_a == n_b) throw InvalidArgument("converged_region: the two truncations must differ");
    const auto sweep = sweep_photon_number(n, r_grid, {n_a, n_b}, opts);
    return converged_region(sweep, n_a, n_b, leak_tol, agree_tol);
}

/// Evenly spaced grid start, start+step, ... up to stop (inclusive within
/// rounding). Points are computed as start + i*step, not accumulated.
inline std::vector<double> make_grid(double start, double stop, double step) {
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
        throw InvalidArgument("grid: start, stop and step must be finite");
    }
    if (stop < start) throw InvalidArgument("grid: stop must be >= start");
    if (stop == start) return {start};
    if (!(step > 0.0)) throw InvalidArgument("grid: step must be positive");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = start + static_cast<double>(i) * step;
    return grid;
}

}  // namespace squeezelab
