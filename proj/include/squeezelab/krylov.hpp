#pragma once

// Action of exp(t K) on a vector for anti-Hermitian banded K: Chebyshev
// expansion, or restarted Krylov (Lanczos, optionally fully reorthogonalised)
// projection with adaptive sub-stepping.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "squeezelab/errors.hpp"
#include "squeezelab/fock.hpp"

namespace squeezelab {

/// Amplitudes over Fock levels 0..N-1.
template <typename Scalar>
class StateVector {
public:
    explicit StateVector(FockDim dim) : dim_(dim), amps_(dim.size(), Scalar(0)) {}

    StateVector(FockDim dim, std::vector<Scalar> amplitudes) : dim_(dim), amps_(std::move(amplitudes)) {
        if (amps_.size() != dim.size()) {
            throw InvalidArgument("StateVector: amplitude count does not match dimension");
        }
    }

    static StateVector basis(FockDim dim, std::size_t level) {
        if (level >= dim.size()) throw InvalidArgument("StateVector::basis: level out of range");
        StateVector v(dim);
        v.amps_[level] = Scalar(1);
        return v;
    }

    static StateVector vacuum(FockDim dim) { return basis(dim, 0); }

    FockDim dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return amps_.size(); }
    std::span<const Scalar> amplitudes() const noexcept { return amps_; }
    std::span<Scalar> amplitudes() noexcept { return amps_; }
    Scalar operator[](std::size_t m) const { return amps_[m]; }

    double probability(std::size_t m) const { return std::norm(amps_[m]); }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

    StateVector<cplx> to_complex() const {
        return StateVector<cplx>(dim_, std::vector<cplx>(amps_.begin(), amps_.end()));
    }

private:
    FockDim dim_;
    std::vector<Scalar> amps_;
};

enum class ExpMethod {
    /// Chebyshev expansion with Bessel-function coefficients over the
    /// Gershgorin spectral bound. No inner products; cost grows with t*rho.
    chebyshev,
    /// Restarted Lanczos projection with a posteriori step control. Adapts to
    /// the part of the spectrum the vector actually sees.
    krylov,
};

struct ExpOptions {
    /// Bound on ||w - exp(tK) v|| accumulated over all sub-steps.
    double tol = 1e-13;
    ExpMethod method = ExpMethod::chebyshev;
    /// Largest t*rho handled by one Chebyshev expansion.
    double chebyshev_step = 400.0;
    int krylov_dim = 30;
    /// Orthogonalise each new Krylov vector against the whole basis (true)
    /// or only against the previous two, as in plain Lanczos (false).
    bool full_reorthogonalization = false;
    /// Maximum number of Krylov restarts before giving up.
    std::size_t max_steps = 5'000'000;
};

struct ExpStats {
    std::size_t steps = 0;
    std::size_t matvecs = 0;
    double error_estimate = 0.0;
};

namespace detail {

template <typename Scalar>
inline Scalar dot(std::span<const Scalar> a, std::span<const Scalar> b) {
    Scalar s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += conj_if_complex(a[i]) * b[i];
    return s;
}

template <typename Scalar>
inline double norm2(std::span<const Scalar> a) {
    double s = 0.0;
    for (const auto& x : a) s += std::norm(x);
    return std::sqrt(s);
}

template <typename Scalar>
inline Scalar from_complex(cplx z) {
    if constexpr (is_complex_v<Scalar>) {
        return z;
    } else {
        return z.real();
    }
}

// Spectral data of the projected generator. In exact arithmetic the Krylov
// projection H of an anti-Hermitian K is tridiagonal with H(j,j) imaginary and
// H(j,j+1) = -conj(H(j+1,j)); i H is then Hermitian tridiagonal and a diagonal
// phase similarity D makes it real symmetric: i H = D T D^H. The eigenproblem
// of T is solved in long double so the error estimate keeps headroom below a
// double precision tolerance.
struct SkewSpectrum {
    using ld = long double;
    using lcplx = std::complex<ld>;
    using LVector = Eigen::Matrix<ld, Eigen::Dynamic, 1>;
    using LMatrix = Eigen::Matrix<ld, Eigen::Dynamic, Eigen::Dynamic>;
    using CVector = Eigen::Matrix<lcplx, Eigen::Dynamic, 1>;

    LVector diag;      // T(j,j)
    LVector offdiag;   // T(j+1,j) >= 0
    std::vector<lcplx> phase;  // D(j,j), phase[0] = 1
    LVector lambda;
    LMatrix vecs;
    ld norm1 = 0.0L;

    explicit SkewSpectrum(const Eigen::MatrixXcd& h) {
        const Eigen::Index m = h.rows();
        diag.resize(m);
        offdiag.resize(std::max<Eigen::Index>(m - 1, 0));
        phase.assign(static_cast<std::size_t>(m), lcplx(1.0L));
        for (Eigen::Index j = 0; j < m; ++j) {
            // (iH)(j,j) = -Im H(j,j)
            diag(j) = -static_cast<ld>(h(j, j).imag());
            if (j + 1 < m) {
                const lcplx lower(h(j + 1, j).real(), h(j + 1, j).imag());
                const lcplx upper(h(j, j + 1).real(), h(j, j + 1).imag());
                const lcplx b = (lower - std::conj(upper)) * 0.5L;  // skew part of H(j+1,j)
                const lcplx g = lcplx(0.0L, 1.0L) * b;               // (iH)(j+1,j)
                const ld mag = std::abs(g);
                offdiag(j) = mag;
                phase[static_cast<std::size_t>(j) + 1] =
                    phase[static_cast<std::size_t>(j)] * (mag > 0.0L ? g / mag : lcplx(1.0L));
            }
        }
        Eigen::SelfAdjointEigenSolver<LMatrix> es;
        es.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
        lambda = es.eigenvalues();
        vecs = es.eigenvectors();
        for (Eigen::Index j = 0; j < m; ++j) {
            ld col = std::abs(diag(j));
            if (j > 0) col += offdiag(j - 1);
            if (j + 1 < m) col += offdiag(j);
            norm1 = std::max(norm1, col);
        }
    }

    Eigen::Index size() const { return lambda.size(); }

    // exp(t H) e1 = D U exp(-i t Lambda) U^T e1
    Eigen::VectorXcd exp_e1(double t) const {
        CVector d(size());
        for (Eigen::Index k = 0; k < size(); ++k) {
            d(k) = std::exp(lcplx(0.0L, -static_cast<ld>(t) * lambda(k))) * vecs(0, k);
        }
        Eigen::VectorXcd y(size());
        for (Eigen::Index j = 0; j < size(); ++j) {
            lcplx acc = 0.0L;
            for (Eigen::Index k = 0; k < size(); ++k) acc += vecs(j, k) * d(k);
            acc *= phase[static_cast<std::size_t>(j)];
            y(j) = cplx(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
        }
        return y;
    }

    // |e_m^T t phi_1(t H) e1|, phi_1(z) = (e^z - 1) / z. The phases drop out
    // of the modulus, so this works with -i T. Small steps use the Taylor
    // series; the spectral sum cancels catastrophically there.
    double phi1_last(double t) const {
        const Eigen::Index last = size() - 1;
        const ld tl = t;
        if (tl * norm1 <= 2.0L) {
            CVector power = CVector::Zero(size());
            CVector next(size());
            power(0) = 1.0L;
            lcplx acc = 0.0L;
            ld coeff = tl;  // t^{k+1} / (k+1)!
            for (int k = 0; k < 400; ++k) {
                acc += coeff * power(last);
                // next = -i T power
                for (Eigen::Index j = 0; j < size(); ++j) {
                    lcplx v = diag(j) * power(j);
                    if (j > 0) v += offdiag(j - 1) * power(j - 1);
                    if (j + 1 < size()) v += offdiag(j) * power(j + 1);
                    next(j) = lcplx(0.0L, -1.0L) * v;
                }
                power.swap(next);
                coeff *= tl / static_cast<ld>(k + 2);
                if (k >= last && std::abs(coeff) * power.norm() <= 1e-30L * std::abs(acc)) break;
            }
            return static_cast<double>(std::abs(acc));
        }
        lcplx acc = 0.0L;
        for (Eigen::Index k = 0; k < size(); ++k) {
            const ld x = tl * lambda(k);
            lcplx f;
            if (std::abs(x) < 1e-10L) {
                f = tl * lcplx(1.0L, -0.5L * x);
            } else {
                f = (std::exp(lcplx(0.0L, -x)) - lcplx(1.0L)) / lcplx(0.0L, -lambda(k));
            }
            acc += vecs(last, k) * f * vecs(0, k);
        }
        return static_cast<double>(std::abs(acc));
    }
};

// Restarted Krylov propagation of w in place: w <- exp(t K) w.
template <typename Scalar>
void propagate_in_place(const BandedOperator<Scalar>& k, std::vector<Scalar>& w, const ExpOptions& opts, double t,
                        ExpStats& stats) {
    const std::size_t n = w.size();
    const int m_max = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opts.krylov_dim), n));

    std::vector<std::vector<Scalar>> basis(static_cast<std::size_t>(m_max) + 1, std::vector<Scalar>(n));
    Eigen::MatrixXcd h(m_max + 1, m_max);

    double t_done = 0.0;
    double tau_guess = t;
    double last_err = 0.0;

    while (t_done < t) {
        if (stats.steps >= opts.max_steps) {
            throw ConvergenceError("apply_exp_generator: step budget of " + std::to_string(opts.max_steps) +
                                       " Krylov restarts exhausted at t=" + std::to_string(t_done) + " of " +
                                       std::to_string(t),
                                   last_err);
        }
        const double beta = norm2<Scalar>(w);
        if (beta == 0.0) return;

        for (std::size_t i = 0; i < n; ++i) basis[0][i] = w[i] / beta;
        h.setZero();

        int m_eff = m_max;
        bool happy = false;
        double h_next = 0.0;
        for (int j = 0; j < m_max; ++j) {
            auto& u = basis[static_cast<std::size_t>(j) + 1];
            k.apply(basis[static_cast<std::size_t>(j)], u);
            ++stats.matvecs;
            const double u_norm0 = norm2<Scalar>(u);
            // two passes of modified Gram-Schmidt keep the basis orthonormal
            // to rounding; ||w|| is preserved only as well as that holds
            const int first = opts.full_reorthogonalization ? 0 : std::max(0, j - 1);
            const int passes = opts.full_reorthogonalization ? 2 : 1;
            for (int pass = 0; pass < passes; ++pass) {
                for (int i = first; i <= j; ++i) {
                    const auto& q = basis[static_cast<std::size_t>(i)];
                    const Scalar c = dot<Scalar>(q, u);
                    Scalar* up = u.data();
                    const Scalar* qp = q.data();
                    for (std::size_t x = 0; x < n; ++x) up[x] -= c * qp[x];
                    h(i, j) += cplx(c);
                }
            }
            h_next = norm2<Scalar>(u);
            if (h_next <= 1e-13 * u_norm0 || h_next == 0.0) {
                m_eff = j + 1;
                happy = true;
                break;
            }
            h(j + 1, j) = h_next;
            for (auto& x : u) x /= h_next;
        }

        const SkewSpectrum spectrum(h.topLeftCorner(m_eff, m_eff));
        const double remaining = t - t_done;
        double tau = std::min(remaining, tau_guess);
        double err = 0.0;
        if (happy) {
            tau = remaining;
        } else {
            int shrinks = 0;
            for (;;) {
                err = beta * h_next * spectrum.phi1_last(tau);
                const double budget = opts.tol * tau / t;
                if (err <= budget) break;
                const double factor = std::clamp(0.9 * std::pow(budget / err, 1.0 / m_eff), 0.1, 0.9);
                tau *= factor;
                if (++shrinks > 200 || tau <= remaining * 1e-15) {
                    throw ConvergenceError("apply_exp_generator: admissible step collapsed", err);
                }
            }
        }

        const Eigen::VectorXcd y = spectrum.exp_e1(tau);
        std::fill(w.begin(), w.end(), Scalar(0));
        for (int j = 0; j < m_eff; ++j) {
            const Scalar c = from_complex<Scalar>(beta * y(j));
            const Scalar* qp = basis[static_cast<std::size_t>(j)].data();
            Scalar* wp = w.data();
            for (std::size_t x = 0; x < n; ++x) wp[x] += c * qp[x];
        }

        t_done = (tau >= remaining) ? t : t_done + tau;
        stats.error_estimate += err;
        last_err = err;
        ++stats.steps;

        const double budget = opts.tol * tau / t;
        tau_guess = (err > 0.0) ? tau * std::clamp(0.9 * std::pow(budget / err, 1.0 / m_eff), 0.5, 2.0)
                                : 2.0 * tau;
    }
}

// Gershgorin bound on the spectral radius.
template <typename Scalar>
double spectral_bound(const BandedOperator<Scalar>& k) {
    std::vector<double> rows(k.size(), 0.0);
    for (const auto& [offset, vals] : k.diagonals()) {
        const std::size_t shift = offset < 0 ? static_cast<std::size_t>(-offset) : 0;
        for (std::size_t i = 0; i < vals.size(); ++i) rows[i + shift] += std::abs(vals[i]);
    }
    return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

// J_0(x) .. J_kmax(x) by Miller's backward recurrence, normalised with
// J_0 + 2 sum J_2k = 1. Entries below `floor` at the tail are dropped.
inline std::vector<double> bessel_j_sequence(double x, double floor) {
    if (x == 0.0) return {1.0};
    const auto start = static_cast<std::size_t>(x + 30.0 + 12.0 * std::cbrt(x) + 0.5 * -std::log10(floor));
    std::vector<double> j(start + 2, 0.0);
    j[start + 1] = 0.0;
    j[start] = 1e-300;
    for (std::size_t k = start; k >= 1; --k) {
        j[k - 1] = (2.0 * static_cast<double>(k) / x) * j[k] - j[k + 1];
        if (std::abs(j[k - 1]) > 1e250) {
            for (std::size_t i = k - 1; i <= start; ++i) j[i] *= 1e-250;
        }
    }
    double norm = j[0];
    for (std::size_t k = 2; k <= start; k += 2) norm += 2.0 * j[k];
    for (auto& v : j) v /= norm;
    std::size_t last = j.size() - 1;
    // the tail bound 2 sum_{k>K} |J_k| must stay under floor
    double tail = 0.0;
    while (last > 0 && tail + 2.0 * std::abs(j[last]) <= floor) {
        tail += 2.0 * std::abs(j[last]);
        --last;
    }
    j.resize(last + 1);
    return j;
}

// w <- exp(t K) w with exp(tK) = J_0(t rho) + 2 sum_k J_k(t rho) P_k,
// P_0 = 1, P_1 = K / rho, P_{k+1} = 2 (K / rho) P_k + P_{k-1}.
template <typename Scalar>
void chebyshev_in_place(const BandedOperator<Scalar>& k, std::vector<Scalar>& w, const ExpOptions& opts,
                        double t, ExpStats& stats) {
    const double rho = spectral_bound(k);
    if (rho == 0.0) return;
    const std::size_t n = w.size();
    const std::size_t substeps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t * rho / opts.chebyshev_step)));
    if (substeps > opts.max_steps) {
        throw ConvergenceError("apply_exp_generator: t*rho=" + std::to_string(t * rho) + " needs " +
                                   std::to_string(substeps) + " Chebyshev sub-steps, budget is " +
                                   std::to_string(opts.max_steps),
                               std::numeric_limits<double>::infinity());
    }
    const double tau = t / static_cast<double>(substeps);
    const double inv_rho = 1.0 / rho;
    // the dropped tail is a systematic norm defect, so it is held far below
    // both tol and the rounding level
    const double tail_floor = 1e-3 * std::min(opts.tol, 1e-16) / static_cast<double>(substeps);
    const std::vector<double> coeff = bessel_j_sequence(tau * rho, tail_floor);

    std::vector<Scalar> prev(n), cur(n), next(n), acc(n);
    for (std::size_t step = 0; step < substeps; ++step) {
        const double beta = norm2<Scalar>(w);
        prev = w;
        for (std::size_t i = 0; i < n; ++i) acc[i] = coeff[0] * prev[i];
        if (coeff.size() > 1) {
            k.apply(prev, cur);
            ++stats.matvecs;
            for (std::size_t i = 0; i < n; ++i) {
                cur[i] *= inv_rho;
                acc[i] += 2.0 * coeff[1] * cur[i];
            }
        }
        for (std::size_t order = 2; order < coeff.size(); ++order) {
            k.apply(cur, next);
            ++stats.matvecs;
            const double c = 2.0 * coeff[order];
            const double two_over_rho = 2.0 * inv_rho;
            Scalar* np = next.data();
            const Scalar* pp = prev.data();
            Scalar* ap = acc.data();
            for (std::size_t i = 0; i < n; ++i) {
                np[i] = two_over_rho * np[i] + pp[i];
                ap[i] += c * np[i];
            }
            std::swap(prev, cur);
            std::swap(cur, next);
        }
        w.swap(acc);
        stats.error_estimate += beta * opts.tol / static_cast<double>(substeps);
        ++stats.steps;
    }
}

template <typename Scalar>
void propagate(const BandedOperator<Scalar>& k, std::vector<Scalar>& w, const ExpOptions& opts, double t,
               ExpStats& stats) {
    if (opts.method == ExpMethod::chebyshev) {
        chebyshev_in_place(k, w, opts, t, stats);
    } else {
        propagate_in_place(k, w, opts, t, stats);
    }
}

inline std::size_t gcd_of_offsets(const auto& diagonals) {
    std::size_t g = 0;
    for (const auto& [offset, vals] : diagonals) {
        g = std::gcd(g, static_cast<std::size_t>(offset < 0 ? -offset : offset));
    }
    return g;
}

}  // namespace detail

/// w = exp(t K) v for anti-Hermitian K.
///
/// Each restart builds an orthonormal Krylov basis of dimension up to
/// `krylov_dim`, then takes the largest sub-step whose a posteriori error
/// estimate beta * h_{m+1,m} * |e_m^T t phi_1(t H_m) e_1| stays within the
/// step's share of `tol`. Throws ConvergenceError if the step budget is
/// exhausted or the admissible step collapses.
///
/// When every offset of K is a multiple of some g > 1 and v lives on a single
/// residue class of levels mod g, the propagation runs on that class only;
/// the arithmetic is identical, the other classes are never touched.
template <typename Scalar>
StateVector<Scalar> apply_exp_generator(const BandedOperator<Scalar>& k, const StateVector<Scalar>& v,
                                        const ExpOptions& opts, double t = 1.0, ExpStats* stats = nullptr) {
    if (k.size() != v.size()) throw InvalidArgument("apply_exp_generator: dimension mismatch");
    if (!(opts.tol > 0.0)) throw InvalidArgument("apply_exp_generator: tol must be positive");
    if (opts.krylov_dim < 2) throw InvalidArgument("apply_exp_generator: krylov_dim must be >= 2");
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("apply_exp_generator: t must be finite and >= 0");

    ExpStats local;
    std::vector<Scalar> w(v.amplitudes().begin(), v.amplitudes().end());
    if (t == 0.0 || k.diagonals().empty()) {
        if (stats) *stats = local;
        return StateVector<Scalar>(v.dim(), std::move(w));
    }

    const std::size_t n = w.size();
    const std::size_t g = detail::gcd_of_offsets(k.diagonals());
    std::size_t residue = n;
    bool single_class = g > 1;
    for (std::size_t i = 0; single_class && i < n; ++i) {
        if (w[i] == Scalar(0)) continue;
        if (residue == n) {
            residue = i % g;
        } else if (i % g != residue) {
            single_class = false;
        }
    }

    if (single_class && residue != n && (n - residue + g - 1) / g >= 2) {
        const std::size_t sub_n = (n - residue + g - 1) / g;
        BandedOperator<Scalar> sub_k{FockDim(sub_n)};
        for (const auto& [offset, vals] : k.diagonals()) {
            const long sub_off = offset / static_cast<long>(g);
            const std::size_t len = sub_k.diagonal_length(sub_off);
            if (len == 0) continue;
            std::vector<Scalar> sub_vals(len);
            // storage index min(row, col) = residue + g * (sub index)
            for (std::size_t i = 0; i < len; ++i) sub_vals[i] = vals[residue + g * i];
            sub_k.set_diagonal(sub_off, std::move(sub_vals));
        }
        std::vector<Scalar> sub_w(sub_n);
        for (std::size_t i = 0; i < sub_n; ++i) sub_w[i] = w[residue + g * i];
        if (!sub_k.diagonals().empty()) detail::propagate(sub_k, sub_w, opts, t, local);
        for (std::size_t i = 0; i < sub_n; ++i) w[residue + g * i] = sub_w[i];
    } else {
        detail::propagate(k, w, opts, t, local);
    }

    if (stats) *stats = local;
    return StateVector<Scalar>(v.dim(), std::move(w));
}

/// Convenience overload with default options and a caller-chosen tolerance.
template <typename Scalar>
StateVector<Scalar> apply_exp_generator(const BandedOperator<Scalar>& k, const StateVector<Scalar>& v, double tol) {
    ExpOptions opts;
    opts.tol = tol;
    return apply_exp_generator(k, v, opts);
}

}  // namespace squeezelab
