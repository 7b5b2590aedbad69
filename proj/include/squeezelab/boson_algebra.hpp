#pragma once

// Exact algebra of single-mode boson operators in normal order.
//
// A polynomial is a finite sum of c * a+^p a^q with rational c. Products are
// brought back to normal order with
//   (a+^p a^q)(a+^p' a^q') = sum_k k! C(q,k) C(p',k) a+^(p+p'-k) a^(q+q'-k),
// which is all the machinery needed for nested commutators and the Taylor
// coefficients of <a+a> under U_n(r).

#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "squeezelab/errors.hpp"

namespace squeezelab {

/// a+^p a^q.
struct Monomial {
    unsigned p = 0;
    unsigned q = 0;

    unsigned degree() const noexcept { return p + q; }
    auto operator<=>(const Monomial&) const = default;
};

class NormalOrderedPoly {
public:
    using term_map = std::map<Monomial, mpq_class>;

    NormalOrderedPoly() = default;

    static NormalOrderedPoly constant(const mpq_class& c) { return monomial(0, 0, c); }

    static NormalOrderedPoly monomial(unsigned p, unsigned q, const mpq_class& c = 1) {
        NormalOrderedPoly poly;
        poly.add_term({p, q}, c);
        return poly;
    }

    static NormalOrderedPoly creation(unsigned n = 1) { return monomial(n, 0); }
    static NormalOrderedPoly annihilation(unsigned n = 1) { return monomial(0, n); }
    static NormalOrderedPoly number() { return monomial(1, 1); }

    const term_map& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }

    unsigned degree() const noexcept {
        unsigned d = 0;
        for (const auto& [mono, c] : terms_) d = std::max(d, mono.degree());
        return d;
    }

    mpq_class coefficient(unsigned p, unsigned q) const {
        auto it = terms_.find({p, q});
        return it == terms_.end() ? mpq_class(0) : it->second;
    }

    /// Adds c to the coefficient of `mono`, erasing it if the sum is zero.
    void add_term(const Monomial& mono, const mpq_class& c) {
        mpq_class value = c;
        value.canonicalize();
        if (value == 0) return;
        auto [it, inserted] = terms_.try_emplace(mono, value);
        if (!inserted) {
            it->second += value;
            if (it->second == 0) terms_.erase(it);
        }
    }

    /// True when every term has p == q, i.e. the operator is diagonal in the
    /// number basis.
    bool is_number_conserving() const {
        for (const auto& [mono, c] : terms_) {
            if (mono.p != mono.q) return false;
        }
        return true;
    }

    /// <m|P|m>: only p == q terms contribute, each as c * m!/(m-p)!.
    mpq_class diagonal_element(unsigned level) const {
        mpq_class total = 0;
        for (const auto& [mono, c] : terms_) {
            if (mono.p != mono.q || mono.p > level) continue;
            mpz_class falling = 1;
            for (unsigned j = 0; j < mono.p; ++j) falling *= level - j;
            total += c * falling;
        }
        return total;
    }

    /// <row|P|col> on the infinite basis, in floating point (the ladder
    /// factors are square roots of integers).
    double matrix_element(std::size_t row, std::size_t col) const {
        double total = 0.0;
        for (const auto& [mono, c] : terms_) {
            // a^q |col> = sqrt(col!/(col-q)!) |col-q>, then a+^p raises to col-q+p
            if (mono.q > col || col - mono.q + mono.p != row) continue;
            const std::size_t mid = col - mono.q;
            long double amp = 1.0L;
            for (unsigned j = 0; j < mono.q; ++j) amp *= std::sqrt(static_cast<long double>(col - j));
            for (unsigned j = 1; j <= mono.p; ++j) amp *= std::sqrt(static_cast<long double>(mid + j));
            total += c.get_d() * static_cast<double>(amp);
        }
        return total;
    }

    NormalOrderedPoly adjoint() const {
        NormalOrderedPoly out;
        for (const auto& [mono, c] : terms_) out.terms_.emplace(Monomial{mono.q, mono.p}, c);
        return out;
    }

    std::string to_string() const;

    NormalOrderedPoly& operator+=(const NormalOrderedPoly& other) {
        for (const auto& [mono, c] : other.terms_) add_term(mono, c);
        return *this;
    }

    NormalOrderedPoly& operator-=(const NormalOrderedPoly& other) {
        for (const auto& [mono, c] : other.terms_) add_term(mono, -c);
        return *this;
    }

    NormalOrderedPoly& operator*=(const mpq_class& s) {
        if (s == 0) {
            terms_.clear();
        } else {
            for (auto& [mono, c] : terms_) c *= s;
        }
        return *this;
    }

    friend NormalOrderedPoly operator+(NormalOrderedPoly a, const NormalOrderedPoly& b) { return a += b; }
    friend NormalOrderedPoly operator-(NormalOrderedPoly a, const NormalOrderedPoly& b) { return a -= b; }
    friend NormalOrderedPoly operator*(const mpq_class& s, NormalOrderedPoly a) { return a *= s; }
    friend bool operator==(const NormalOrderedPoly& a, const NormalOrderedPoly& b) { return a.terms_ == b.terms_; }

private:
    term_map terms_;
};

namespace detail {

inline mpz_class binomial(unsigned n, unsigned k) {
    mpz_class out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

inline mpz_class factorial(unsigned n) {
    mpz_class out;
    mpz_fac_ui(out.get_mpz_t(), n);
    return out;
}

}  // namespace detail

inline std::string NormalOrderedPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [mono, c] = *it;
        std::string coeff = c.get_str();
        if (!first) {
            if (coeff.front() == '-') {
                out += " - ";
                coeff.erase(0, 1);
            } else {
                out += " + ";
            }
        }
        first = false;
        const bool unit = mono.degree() > 0 && (coeff == "1" || coeff == "-1");
        if (!unit) {
            out += coeff;
        } else if (coeff == "-1") {
            out += "-";
        }
        auto power = [](const char* sym, unsigned e) {
            std::string s = sym;
            if (e > 1) s += "^" + std::to_string(e);
            return s;
        };
        if (mono.p > 0) out += (unit ? "" : " ") + power("a+", mono.p);
        if (mono.q > 0) out += ((unit && mono.p == 0) ? "" : " ") + power("a", mono.q);
    }
    return out;
}

/// Normal-ordered product.
inline NormalOrderedPoly multiply(const NormalOrderedPoly& lhs, const NormalOrderedPoly& rhs) {
    NormalOrderedPoly out;
    for (const auto& [ml, cl] : lhs.terms()) {
        for (const auto& [mr, cr] : rhs.terms()) {
            const mpq_class base = cl * cr;
            const unsigned kmax = std::min(ml.q, mr.p);
            for (unsigned k = 0; k <= kmax; ++k) {
                const mpz_class weight =
                    detail::factorial(k) * detail::binomial(ml.q, k) * detail::binomial(mr.p, k);
                out.add_term({ml.p + mr.p - k, ml.q + mr.q - k}, base * weight);
            }
        }
    }
    return out;
}

inline NormalOrderedPoly commutator(const NormalOrderedPoly& lhs, const NormalOrderedPoly& rhs) {
    return multiply(lhs, rhs) - multiply(rhs, lhs);
}

/// Limits on intermediate polynomial size.
struct AlgebraBudget {
    unsigned max_degree = 2000;
    std::size_t max_terms = 500'000;
};

inline void check_budget(const NormalOrderedPoly& poly, const AlgebraBudget& budget, unsigned order) {
    if (poly.degree() > budget.max_degree) {
        throw ResourceError("nested commutator of order " + std::to_string(order) + " reached degree " +
                                std::to_string(poly.degree()) + " above max_degree=" +
                                std::to_string(budget.max_degree),
                            "max_degree");
    }
    if (poly.size() > budget.max_terms) {
        throw ResourceError("nested commutator of order " + std::to_string(order) + " has " +
                                std::to_string(poly.size()) + " terms above max_terms=" +
                                std::to_string(budget.max_terms),
                            "max_terms");
    }
}

/// a+^n - a^n, the generator of U_n(r) at r = 1.
inline NormalOrderedPoly squeeze_generator(unsigned n) {
    if (n < 1) throw InvalidArgument("squeeze_generator: order must be >= 1");
    return NormalOrderedPoly::creation(n) - NormalOrderedPoly::annihilation(n);
}

/// [A, B]_m with A = a+^n - a^n and B = a+a; [A, B]_0 = B.
inline NormalOrderedPoly nested_commutator(unsigned n, unsigned m, const AlgebraBudget& budget = {}) {
    const auto a = squeeze_generator(n);
    auto b = NormalOrderedPoly::number();
    for (unsigned order = 1; order <= m; ++order) {
        b = commutator(a, b);
        check_budget(b, budget, order);
    }
    return b;
}

/// <0|P|0>, the constant term.
inline mpq_class vacuum_expectation(const NormalOrderedPoly& poly) { return poly.coefficient(0, 0); }

struct SeriesEntry {
    unsigned m = 0;
    mpq_class c;
};

/// Exact Taylor coefficients of <a+a>_n = sum_m c_m r^m.
struct CoefficientSeries {
    unsigned n = 0;
    std::vector<SeriesEntry> entries;  // every power 0..max_order, ascending

    unsigned max_order() const { return entries.empty() ? 0 : entries.back().m; }

    const mpq_class& at(unsigned m) const {
        if (m >= entries.size()) throw InvalidArgument("CoefficientSeries: order " + std::to_string(m) + " not computed");
        return entries[m].c;
    }

    /// The even powers 2, 4, ..., max_order.
    std::vector<SeriesEntry> even_entries() const {
        std::vector<SeriesEntry> out;
        for (const auto& e : entries) {
            if (e.m >= 2 && e.m % 2 == 0) out.push_back(e);
        }
        return out;
    }

    std::vector<SeriesEntry> nonzero_entries() const {
        std::vector<SeriesEntry> out;
        for (const auto& e : entries) {
            if (e.c != 0) out.push_back(e);
        }
        return out;
    }

    /// The same series cut after power `order`.
    CoefficientSeries truncated(unsigned order) const {
        CoefficientSeries out;
        out.n = n;
        for (const auto& e : entries) {
            if (e.m <= order) out.entries.push_back(e);
        }
        return out;
    }
};

/// c_m = <0|[A, a+a]_m|0> / m! for m = 0 .. 2M, i.e. through the M-th even
/// power. Odd powers are computed too; they vanish exactly.
inline CoefficientSeries coefficients(unsigned n, unsigned M, const AlgebraBudget& budget = {}) {
    if (n < 1) throw InvalidArgument("coefficients: order n must be >= 1");
    if (M < 1) throw InvalidArgument("coefficients: M must be >= 1");
    const auto a = squeeze_generator(n);
    auto b = NormalOrderedPoly::number();
    CoefficientSeries series;
    series.n = n;
    series.entries.push_back({0, vacuum_expectation(b)});
    mpz_class m_factorial = 1;
    for (unsigned m = 1; m <= 2 * M; ++m) {
        b = commutator(a, b);
        check_budget(b, budget, m);
        m_factorial *= m;
        mpq_class c = vacuum_expectation(b) / m_factorial;
        c.canonicalize();
        series.entries.push_back({m, c});
    }
    return series;
}

/// ln|x| for a nonzero rational, without converting x itself to double.
inline double log_abs(const mpq_class& x) {
    if (x == 0) throw InvalidArgument("log_abs: zero");
    auto log_mpz = [](const mpz_class& z) {
        long exp2 = 0;
        const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
        return std::log(std::abs(mant)) + static_cast<double>(exp2) * std::log(2.0);
    };
    return log_mpz(x.get_num()) - log_mpz(x.get_den());
}

/// 17 significant digits of a rational, usable beyond double range.
inline std::string to_decimal(const mpq_class& x, int digits = 17) {
    if (x == 0) return "0";
    mpf_class f(x, 256);
    char buf[128];
    gmp_snprintf(buf, sizeof buf, "%.*Fg", digits, f.get_mpf_t());
    return buf;
}

/// sum_m c_m r^m over the computed entries, evaluated term by term in the
/// log domain so huge coefficients do not overflow before meeting r^m.
inline double taylor_partial_sum(const CoefficientSeries& series, double r) {
    if (!(r >= 0.0)) throw InvalidArgument("taylor_partial_sum: r must be >= 0");
    double total = 0.0;
    for (const auto& e : series.entries) {
        if (e.c == 0) continue;
        if (e.m == 0) {
            total += e.c.get_d();
            continue;
        }
        if (r == 0.0) continue;
        const double sign = e.c > 0 ? 1.0 : -1.0;
        total += sign * std::exp(log_abs(e.c) + static_cast<double>(e.m) * std::log(r));
    }
    return total;
}

/// Integer sum formula for [a^n, a+^n] at level m:
/// sum_{k=1}^n k! C(n,k)^2 prod_{j=0}^{n-k-1} (m - j).
inline mpz_class commutator_sum_formula(unsigned n, unsigned level) {
    mpz_class total = 0;
    for (unsigned k = 1; k <= n; ++k) {
        mpz_class falling = 1;
        for (unsigned j = 0; j + k < n; ++j) falling *= mpz_class(level) - j;
        const mpz_class binom = detail::binomial(n, k);
        total += detail::factorial(k) * binom * binom * falling;
    }
    return total;
}

/// Coefficients (constant first) of [a^n, a+^n] written as a polynomial in
/// the number operator, for the orders where it is tabulated explicitly:
///   n=1: 1
///   n=2: 4N + 2
///   n=3: 9N^2 + 9N + 6
///   n=4: 16N^3 + 24N^2 + 56N + 24
inline std::optional<std::vector<long>> explicit_commutator_polynomial(unsigned n) {
    switch (n) {
        case 1: return std::vector<long>{1};
        case 2: return std::vector<long>{2, 4};
        case 3: return std::vector<long>{6, 9, 9};
        case 4: return std::vector<long>{24, 56, 24, 16};
        default: return std::nullopt;
    }
}

inline mpz_class evaluate_number_polynomial(const std::vector<long>& coeffs, unsigned level) {
    mpz_class total = 0;
    mpz_class power = 1;
    for (const long c : coeffs) {
        total += c * power;
        power *= level;
    }
    return total;
}

struct ClosedFormRow {
    unsigned level = 0;
    mpz_class symbolic;
    mpz_class sum_formula;
    std::optional<mpz_class> explicit_form;
};

struct ClosedFormReport {
    unsigned n = 0;
    bool number_conserving = true;  // symbolic commutator has only p == q terms
    bool vacuum_is_factorial = true;
    std::optional<unsigned> first_mismatch;
    std::vector<ClosedFormRow> rows;

    bool passed() const { return number_conserving && vacuum_is_factorial && !first_mismatch; }
};

/// Evaluates [a^n, a+^n] from the algebra engine, the sum formula and (for
/// n <= 4) the explicit polynomial on levels 0..max_level and compares them
/// exactly.
inline ClosedFormReport verify_closed_form(unsigned n, unsigned max_level) {
    if (n < 1) throw InvalidArgument("verify_closed_form: order must be >= 1");
    const auto symbolic = commutator(NormalOrderedPoly::annihilation(n), NormalOrderedPoly::creation(n));
    const auto explicit_form = explicit_commutator_polynomial(n);

    ClosedFormReport report;
    report.n = n;
    report.number_conserving = symbolic.is_number_conserving();
    report.vacuum_is_factorial = vacuum_expectation(symbolic) == detail::factorial(n);
    for (unsigned m = 0; m <= max_level; ++m) {
        ClosedFormRow row;
        row.level = m;
        const mpq_class value = symbolic.diagonal_element(m);
        row.symbolic = value.get_num();
        const bool integral = value.get_den() == 1;
        row.sum_formula = commutator_sum_formula(n, m);
        if (explicit_form) row.explicit_form = evaluate_number_polynomial(*explicit_form, m);
        const bool ok = integral && row.symbolic == row.sum_formula &&
                        (!row.explicit_form || *row.explicit_form == row.symbolic);
        if (!ok && !report.first_mismatch) report.first_mismatch = m;
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace squeezelab
