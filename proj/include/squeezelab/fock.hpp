#pragma once

// Truncated single-mode Fock space: ladder operators, the n-photon squeezing
// generator, and the diagonal commutator [a^n, a+^n].

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "squeezelab/errors.hpp"

namespace squeezelab {

using cplx = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename Scalar>
inline Scalar conj_if_complex(const Scalar& x) {
    if constexpr (is_complex_v<Scalar>) {
        return std::conj(x);
    } else {
        return x;
    }
}

/// Number of retained Fock levels; the basis is |0>, ..., |N-1>.
class FockDim {
public:
    explicit FockDim(std::size_t levels) : levels_(levels) {
        if (levels < 2) {
            throw InvalidArgument("FockDim: need at least 2 levels, got " + std::to_string(levels));
        }
    }

    std::size_t size() const noexcept { return levels_; }

    friend bool operator==(FockDim, FockDim) = default;

private:
    std::size_t levels_;
};

/// Order n and complex amplitude r of U_n(r) = exp(r a+^n - conj(r) a^n).
struct SqueezeParams {
    unsigned n = 1;
    cplx r = 0.0;

    SqueezeParams(unsigned order, cplx amplitude) : n(order), r(amplitude) {
        if (order < 1) {
            throw InvalidArgument("SqueezeParams: order must be >= 1");
        }
        if (!std::isfinite(amplitude.real()) || !std::isfinite(amplitude.imag())) {
            throw InvalidArgument("SqueezeParams: r must be finite");
        }
    }

    bool is_real() const noexcept { return r.imag() == 0.0; }
};

/// Square matrix on a truncated Fock basis stored by diagonals.
///
/// Offset d = col - row. The element with offset d and storage index i sits
/// at (i, i + d) for d >= 0 and at (i - d, i) for d < 0, so index i is
/// always min(row, col) and a diagonal holds N - |d| values. Offsets not
/// present in the map are identically zero.
template <typename Scalar>
class BandedOperator {
public:
    using scalar_type = Scalar;
    using diagonal_map = std::map<long, std::vector<Scalar>>;

    explicit BandedOperator(FockDim dim) : dim_(dim) {}

    static BandedOperator identity(FockDim dim) {
        BandedOperator id(dim);
        id.set_diagonal(0, std::vector<Scalar>(dim.size(), Scalar(1)));
        return id;
    }

    FockDim dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_.size(); }
    const diagonal_map& diagonals() const noexcept { return diags_; }

    std::size_t diagonal_length(long offset) const noexcept {
        const auto span = static_cast<std::size_t>(offset < 0 ? -offset : offset);
        return span >= size() ? 0 : size() - span;
    }

    void set_diagonal(long offset, std::vector<Scalar> values) {
        if (values.size() != diagonal_length(offset) || values.empty()) {
            throw InvalidArgument("BandedOperator: diagonal " + std::to_string(offset) +
                                  " expects " + std::to_string(diagonal_length(offset)) +
                                  " values, got " + std::to_string(values.size()));
        }
        diags_[offset] = std::move(values);
    }

    Scalar operator()(std::size_t row, std::size_t col) const {
        if (row >= size() || col >= size()) {
            throw InvalidArgument("BandedOperator: index out of range");
        }
        const long offset = static_cast<long>(col) - static_cast<long>(row);
        auto it = diags_.find(offset);
        if (it == diags_.end()) return Scalar(0);
        return it->second[std::min(row, col)];
    }

    bool is_diagonal() const noexcept {
        return diags_.empty() || (diags_.size() == 1 && diags_.begin()->first == 0);
    }

    /// Main diagonal, zero-filled when absent.
    std::vector<Scalar> main_diagonal() const {
        auto it = diags_.find(0);
        if (it == diags_.end()) return std::vector<Scalar>(size(), Scalar(0));
        return it->second;
    }

    /// y = A x.
    void apply(std::span<const Scalar> x, std::span<Scalar> y) const {
        const std::size_t n = size();
        if (x.size() != n || y.size() != n) {
            throw InvalidArgument("BandedOperator::apply: vector length mismatch");
        }
        std::fill(y.begin(), y.end(), Scalar(0));
        for (const auto& [offset, vals] : diags_) {
            const std::size_t len = vals.size();
            const Scalar* v = vals.data();
            if (offset >= 0) {
                const std::size_t d = static_cast<std::size_t>(offset);
                for (std::size_t i = 0; i < len; ++i) y[i] += v[i] * x[i + d];
            } else {
                const std::size_t d = static_cast<std::size_t>(-offset);
                for (std::size_t i = 0; i < len; ++i) y[i + d] += v[i] * x[i];
            }
        }
    }

    std::vector<Scalar> apply(std::span<const Scalar> x) const {
        std::vector<Scalar> y(size());
        apply(x, y);
        return y;
    }

    BandedOperator adjoint() const {
        BandedOperator out(dim_);
        for (const auto& [offset, vals] : diags_) {
            std::vector<Scalar> c(vals.size());
            for (std::size_t i = 0; i < vals.size(); ++i) c[i] = conj_if_complex(vals[i]);
            out.diags_[-offset] = std::move(c);
        }
        return out;
    }

    template <typename Other>
    BandedOperator<Other> cast() const {
        BandedOperator<Other> out(dim_);
        for (const auto& [offset, vals] : diags_) {
            out.set_diagonal(offset, std::vector<Other>(vals.begin(), vals.end()));
        }
        return out;
    }

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense() const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
            Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
        for (const auto& [offset, vals] : diags_) {
            for (std::size_t i = 0; i < vals.size(); ++i) {
                const auto row = static_cast<Eigen::Index>(offset >= 0 ? i : i - offset);
                const auto col = static_cast<Eigen::Index>(offset >= 0 ? i + offset : i);
                m(row, col) = vals[i];
            }
        }
        return m;
    }

    BandedOperator& operator*=(const Scalar& s) {
        for (auto& [offset, vals] : diags_) {
            for (auto& v : vals) v *= s;
        }
        return *this;
    }

    friend BandedOperator operator*(Scalar s, BandedOperator op) { return op *= s; }

    friend BandedOperator operator+(const BandedOperator& a, const BandedOperator& b) {
        return combine(a, b, Scalar(1));
    }

    friend BandedOperator operator-(const BandedOperator& a, const BandedOperator& b) {
        return combine(a, b, Scalar(-1));
    }

    friend BandedOperator operator*(const BandedOperator& a, const BandedOperator& b) {
        check_same_dim(a, b);
        const long n = static_cast<long>(a.size());
        std::map<long, std::vector<Scalar>> acc;
        for (const auto& [da, va] : a.diags_) {
            for (const auto& [db, vb] : b.diags_) {
                const long dc = da + db;
                if (dc >= n || dc <= -n) continue;
                auto& out = acc[dc];
                if (out.empty()) out.assign(static_cast<std::size_t>(n - std::abs(dc)), Scalar(0));
                // C(r, r+da+db) += A(r, r+da) * B(r+da, r+da+db)
                const long r_lo = std::max({0L, -da, -dc});
                const long r_hi = std::min({n, n - da, n - dc});
                for (long r = r_lo; r < r_hi; ++r) {
                    const long k = r + da;
                    const long c = r + dc;
                    out[static_cast<std::size_t>(std::min(r, c))] +=
                        va[static_cast<std::size_t>(std::min(r, k))] *
                        vb[static_cast<std::size_t>(std::min(k, c))];
                }
            }
        }
        BandedOperator out(a.dim_);
        for (auto& [d, vals] : acc) out.diags_[d] = std::move(vals);
        return out;
    }

private:
    static void check_same_dim(const BandedOperator& a, const BandedOperator& b) {
        if (a.size() != b.size()) throw InvalidArgument("BandedOperator: dimension mismatch");
    }

    static BandedOperator combine(const BandedOperator& a, const BandedOperator& b, Scalar sign) {
        check_same_dim(a, b);
        BandedOperator out = a;
        for (const auto& [offset, vals] : b.diags_) {
            auto& dst = out.diags_[offset];
            if (dst.empty()) dst.assign(vals.size(), Scalar(0));
            for (std::size_t i = 0; i < vals.size(); ++i) dst[i] += sign * vals[i];
        }
        return out;
    }

    FockDim dim_;
    diagonal_map diags_;
};

using RealOperator = BandedOperator<double>;
using ComplexOperator = BandedOperator<cplx>;

namespace detail {

// sqrt(k (k-1) ... (k-n+1)). The product is formed in long double, which is
// exact up to 2^64, so no rounding accumulates across factors.
inline double sqrt_falling_factorial(std::size_t k, unsigned n) {
    long double prod = 1.0L;
    for (unsigned j = 0; j < n; ++j) prod *= static_cast<long double>(k - j);
    return static_cast<double>(std::sqrt(prod));
}

}  // namespace detail

/// a^n with entries (k-n, k) = sqrt(k!/(k-n)!). Zero matrix when n >= N.
template <typename Scalar = double>
BandedOperator<Scalar> annihilation_power(FockDim dim, unsigned n) {
    if (n == 0) return BandedOperator<Scalar>::identity(dim);
    BandedOperator<Scalar> op(dim);
    if (n >= dim.size()) return op;
    std::vector<Scalar> vals(dim.size() - n);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        vals[i] = Scalar(detail::sqrt_falling_factorial(i + n, n));
    }
    op.set_diagonal(static_cast<long>(n), std::move(vals));
    return op;
}

template <typename Scalar = double>
BandedOperator<Scalar> creation_power(FockDim dim, unsigned n) {
    return annihilation_power<Scalar>(dim, n).adjoint();
}

template <typename Scalar = double>
BandedOperator<Scalar> annihilation_matrix(FockDim dim) {
    return annihilation_power<Scalar>(dim, 1);
}

template <typename Scalar = double>
BandedOperator<Scalar> creation_matrix(FockDim dim) {
    return creation_power<Scalar>(dim, 1);
}

/// Diagonal a+ a with entries 0, 1, ..., N-1.
template <typename Scalar = double>
BandedOperator<Scalar> number_operator(FockDim dim) {
    BandedOperator<Scalar> op(dim);
    std::vector<Scalar> vals(dim.size());
    for (std::size_t m = 0; m < vals.size(); ++m) vals[m] = Scalar(static_cast<double>(m));
    op.set_diagonal(0, std::move(vals));
    return op;
}

/// Matrix power by repeated squaring. For ladder operators prefer
/// annihilation_power/creation_power, which avoid floating products.
template <typename Scalar>
BandedOperator<Scalar> power(const BandedOperator<Scalar>& op, unsigned n) {
    BandedOperator<Scalar> result = BandedOperator<Scalar>::identity(op.dim());
    BandedOperator<Scalar> base = op;
    while (n > 0) {
        if (n & 1U) result = result * base;
        n >>= 1U;
        if (n > 0) base = base * base;
    }
    return result;
}

inline void require_order_fits(unsigned n, FockDim dim) {
    if (dim.size() <= n) {
        throw InvalidArgument("truncation N=" + std::to_string(dim.size()) +
                              " must exceed squeezing order n=" + std::to_string(n));
    }
}

/// K = r a+^n - conj(r) a^n, the exponent of U_n(r). Anti-Hermitian by
/// construction: the two diagonals are exact negated conjugates.
inline ComplexOperator generator(const SqueezeParams& params, FockDim dim) {
    require_order_fits(params.n, dim);
    const auto n = static_cast<long>(params.n);
    const auto lower = annihilation_power<double>(dim, params.n).diagonals().at(n);
    ComplexOperator k(dim);
    std::vector<cplx> below(lower.size());
    std::vector<cplx> above(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        below[i] = params.r * lower[i];
        above[i] = -std::conj(below[i]);
    }
    k.set_diagonal(-n, std::move(below));
    k.set_diagonal(n, std::move(above));
    return k;
}

/// Real-r specialisation of generator(): K = r (a+^n - a^n), real antisymmetric.
inline RealOperator generator_real(unsigned n, double r, FockDim dim) {
    if (n < 1) throw InvalidArgument("generator_real: order must be >= 1");
    require_order_fits(n, dim);
    const auto off = static_cast<long>(n);
    const auto lower = annihilation_power<double>(dim, n).diagonals().at(off);
    RealOperator k(dim);
    std::vector<double> below(lower.size());
    std::vector<double> above(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        below[i] = r * lower[i];
        above[i] = -below[i];
    }
    k.set_diagonal(-off, std::move(below));
    k.set_diagonal(off, std::move(above));
    return k;
}

/// Level-m value of [a^n, a+^n] = sum_{k=1}^n k! C(n,k)^2 prod_{j<n-k} (m - j).
inline long double commutator_closed_form_value(unsigned n, std::size_t level) {
    long double total = 0.0L;
    long double k_factorial = 1.0L;
    long double binom = 1.0L;  // C(n, k)
    for (unsigned k = 1; k <= n; ++k) {
        k_factorial *= k;
        binom = binom * static_cast<long double>(n - k + 1) / static_cast<long double>(k);
        long double falling = 1.0L;
        for (unsigned j = 0; j + k < n; ++j) {
            falling *= static_cast<long double>(level) - static_cast<long double>(j);
        }
        total += k_factorial * binom * binom * falling;
    }
    return total;
}

/// Diagonal operator A_n = [a^n, a+^n] on the untruncated space, restricted
/// to levels 0..N-1.
inline RealOperator a_n_commutator_closed_form(unsigned n, FockDim dim) {
    if (n < 1) throw InvalidArgument("a_n_commutator_closed_form: order must be >= 1");
    RealOperator op(dim);
    std::vector<double> vals(dim.size());
    for (std::size_t m = 0; m < vals.size(); ++m) {
        vals[m] = static_cast<double>(commutator_closed_form_value(n, m));
    }
    op.set_diagonal(0, std::move(vals));
    return op;
}

}  // namespace squeezelab
