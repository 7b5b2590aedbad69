#pragma once

// Invariant checks run by `squeezelab verify`. Each check returns a named
// pass/fail result with a one-line summary and optional table lines.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "squeezelab/boson_algebra.hpp"
#include "squeezelab/evolve.hpp"
#include "squeezelab/fock.hpp"

namespace squeezelab::verify {

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string summary;
    std::vector<std::string> lines;
};

struct Config {
    std::vector<unsigned> orders{1, 2, 3, 4};           // algebraic checks
    std::vector<unsigned> numeric_orders{2, 3, 4};      // evolution checks
    std::size_t levels = 20;
    unsigned coefficient_order = 10;                    // even powers to 2M
    std::pair<std::size_t, std::size_t> truncations{2016, 2017};
    std::vector<double> r_grid = make_grid(0.0, 1.0, 0.005);
    double leak_tol = default_leak_tol;
    double agree_tol = 1e-6;
    double h = 1e-3;
    SweepOptions sweep;
};

inline const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"closed-form", "positivity",    "c2",       "odd-zero", "norm",
                                                "phase",       "monotonic",     "convex",   "second-derivative"};
    return names;
}

/// Checks run when none is selected explicitly.
inline const std::vector<std::string>& default_checks() {
    static const std::vector<std::string> names{"closed-form", "positivity", "c2",        "odd-zero",
                                                "norm",        "phase",      "monotonic", "convex"};
    return names;
}

namespace detail {

inline std::string fmt(const char* pattern, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

struct Certified {
    SweepResult sweep;
    double region = 0.0;
    std::vector<SweepRow> curve;  // rows of the first truncation with r <= region
};

inline Certified certify(unsigned n, const Config& cfg) {
    Certified c;
    const auto [na, nb] = cfg.truncations;
    c.sweep = sweep_photon_number(n, cfg.r_grid, {na, nb}, cfg.sweep);
    c.region = converged_region(c.sweep, na, nb, cfg.leak_tol, cfg.agree_tol);
    for (const auto& row : c.sweep.curve(na)) {
        if (row.r <= c.region) c.curve.push_back(row);
    }
    return c;
}

}  // namespace detail

inline CheckResult closed_form(const Config& cfg) {
    CheckResult out{"closed-form"};
    for (const unsigned n : cfg.orders) {
        const auto report = verify_closed_form(n, static_cast<unsigned>(cfg.levels));
        out.passed = out.passed && report.passed();
        out.lines.push_back(detail::fmt("n=%u number-conserving=%s vacuum=n!:%s %s", n,
                                        report.number_conserving ? "yes" : "no",
                                        report.vacuum_is_factorial ? "yes" : "no",
                                        report.first_mismatch
                                            ? detail::fmt("mismatch at level %u", *report.first_mismatch).c_str()
                                            : "all levels match"));
        for (const auto& row : report.rows) {
            std::string line = detail::fmt("  level %u commutator %s formula %s", row.level,
                                           row.symbolic.get_str().c_str(), row.sum_formula.get_str().c_str());
            if (row.explicit_form) line += " explicit " + row.explicit_form->get_str();
            const bool match = row.symbolic == row.sum_formula && (!row.explicit_form || *row.explicit_form == row.symbolic);
            out.lines.push_back(line + (match ? "" : "  MISMATCH"));
        }
    }
    out.summary = detail::fmt("[a^n, a+^n] equals the sum formula on levels 0..%zu", cfg.levels);
    return out;
}

inline CheckResult positivity(const Config& cfg) {
    CheckResult out{"positivity"};
    for (const unsigned n : cfg.orders) {
        const mpz_class floor = squeezelab::detail::factorial(n);
        mpz_class minimum = commutator_sum_formula(n, 0);
        for (unsigned m = 0; m <= cfg.levels; ++m) {
            const mpz_class v = commutator_sum_formula(n, m);
            if (v < minimum) minimum = v;
            if (v < floor) out.passed = false;
        }
        out.lines.push_back(detail::fmt("n=%u min diagonal %s (n! = %s)", n, minimum.get_str().c_str(),
                                        floor.get_str().c_str()));
    }
    out.summary = "every diagonal entry of A_n is >= n!";
    return out;
}

inline CheckResult c2(const Config& cfg) {
    CheckResult out{"c2"};
    for (const unsigned n : cfg.orders) {
        const auto series = coefficients(n, 1);
        const mpq_class expected = mpq_class(n) * mpq_class(squeezelab::detail::factorial(n));
        const bool ok = series.at(2) == expected;
        out.passed = out.passed && ok;
        out.lines.push_back(detail::fmt("n=%u c_2 = %s expected %s", n, series.at(2).get_str().c_str(),
                                        expected.get_str().c_str()));
    }
    out.summary = "c_2 = n * n!";
    return out;
}

inline CheckResult odd_zero(const Config& cfg) {
    CheckResult out{"odd-zero"};
    for (const unsigned n : cfg.orders) {
        const auto series = coefficients(n, cfg.coefficient_order);
        unsigned nonzero_odd = 0;
        for (const auto& e : series.entries) {
            if (e.m % 2 == 1 && e.c != 0) ++nonzero_odd;
        }
        out.passed = out.passed && nonzero_odd == 0;
        out.lines.push_back(detail::fmt("n=%u odd powers 1..%u: %u non-zero", n, series.max_order() - 1, nonzero_odd));
    }
    out.summary = "odd Taylor coefficients vanish exactly";
    return out;
}

inline CheckResult norm(const Config& cfg) {
    CheckResult out{"norm"};
    double worst = 0.0;
    for (const unsigned n : cfg.numeric_orders) {
        const auto [na, nb] = cfg.truncations;
        const auto sweep = sweep_photon_number(n, cfg.r_grid, {na, nb}, cfg.sweep);
        double worst_n = 0.0;
        for (const auto& row : sweep.rows) {
            if (row.status == RowStatus::failed) {
                out.passed = false;
                continue;
            }
            worst_n = std::max(worst_n, row.norm_error);
        }
        worst = std::max(worst, worst_n);
        out.lines.push_back(detail::fmt("n=%u %zu evolutions, failed %zu, max | |psi| - 1 | = %.3e", n,
                                        sweep.rows.size(), sweep.failed_rows(), worst_n));
    }
    out.passed = out.passed && worst <= 1e-10;
    out.summary = detail::fmt("max | |psi| - 1 | = %.3e (limit 1e-10)", worst);
    return out;
}

inline CheckResult phase(const Config& cfg) {
    CheckResult out{"phase"};
    const FockDim dim(cfg.truncations.first);
    double worst = 0.0;
    for (const unsigned n : cfg.numeric_orders) {
        for (const double mag : {0.03, 0.06}) {
            double ref = 0.0;
            std::string line = detail::fmt("n=%u |r|=%.2f", n, mag);
            for (const double theta : {0.0, std::numbers::pi / 4, std::numbers::pi / 2}) {
                const auto state = squeezed_state(SqueezeParams(n, std::polar(mag, theta)), dim, cfg.sweep.exp);
                const double photons = mean_photon(state);
                if (theta == 0.0) ref = photons;
                worst = std::max(worst, std::abs(photons - ref));
                line += detail::fmt(" %.15g", photons);
            }
            out.lines.push_back(line);
        }
    }
    out.passed = worst <= 1e-9;
    out.summary = detail::fmt("arg r in {0, pi/4, pi/2}: max spread %.3e (limit 1e-9)", worst);
    return out;
}

inline CheckResult monotonic(const Config& cfg) {
    CheckResult out{"monotonic"};
    for (const unsigned n : cfg.numeric_orders) {
        const auto c = detail::certify(n, cfg);
        double worst_drop = 0.0;
        for (std::size_t i = 1; i < c.curve.size(); ++i) {
            worst_drop = std::max(worst_drop, c.curve[i - 1].mean_photon - c.curve[i].mean_photon);
        }
        const bool ok = worst_drop <= 1e-12;
        out.passed = out.passed && ok;
        out.lines.push_back(detail::fmt("n=%u certified r <= %.4g (%zu points), largest decrease %.3e", n, c.region,
                                        c.curve.size(), worst_drop));
    }
    out.summary = "<a+a> non-decreasing on the certified region (slack 1e-12)";
    return out;
}

inline CheckResult convex(const Config& cfg) {
    CheckResult out{"convex"};
    for (const unsigned n : cfg.numeric_orders) {
        const auto c = detail::certify(n, cfg);
        double scale = 0.0;
        for (const auto& row : c.curve) scale = std::max(scale, std::abs(row.mean_photon));
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < c.curve.size(); ++i) {
            const double d2 = c.curve[i + 1].mean_photon - 2.0 * c.curve[i].mean_photon + c.curve[i - 1].mean_photon;
            worst = std::min(worst, d2);
        }
        const bool ok = worst >= -1e-8 * scale;
        out.passed = out.passed && ok;
        out.lines.push_back(detail::fmt("n=%u certified r <= %.4g, most negative second difference %.3e (scale %.3e)",
                                        n, c.region, worst, scale));
    }
    out.summary = "central second differences >= -1e-8 * scale on the certified region";
    return out;
}

/// fd against 2n<A_n> at every certified grid point with r >= h.
inline CheckResult second_derivative(const Config& cfg) {
    CheckResult out{"second-derivative"};
    for (const unsigned n : cfg.numeric_orders) {
        const auto c = detail::certify(n, cfg);
        double worst = 0.0;
        double worst_r = 0.0;
        double last_good = 0.0;
        bool all_good = true;
        for (const auto& row : c.curve) {
            const auto chk = second_derivative_check(n, row.r, FockDim(cfg.truncations.first), cfg.h, cfg.sweep.exp,
                                                     cfg.leak_tol);
            const double rel = chk.relative_difference();
            if (rel > worst) {
                worst = rel;
                worst_r = row.r;
            }
            const bool good = rel <= 1e-4 && chk.fd > 0.0 && chk.analytic > 0.0;
            if (good && all_good) last_good = row.r;
            all_good = all_good && good;
        }
        out.passed = out.passed && all_good;
        out.lines.push_back(detail::fmt("n=%u certified r <= %.4g: max relative gap %.3e at r=%.4g; holds to 1e-4 up "
                                        "to r=%.4g",
                                        n, c.region, worst, worst_r, last_good));
    }
    out.summary = detail::fmt("central difference (h=%.0e) matches 2n<A_n> to 1e-4 on the certified region", cfg.h);
    return out;
}

inline CheckResult run(const std::string& name, const Config& cfg) {
    if (name == "closed-form") return closed_form(cfg);
    if (name == "positivity") return positivity(cfg);
    if (name == "c2") return c2(cfg);
    if (name == "odd-zero") return odd_zero(cfg);
    if (name == "norm") return norm(cfg);
    if (name == "phase") return phase(cfg);
    if (name == "monotonic") return monotonic(cfg);
    if (name == "convex") return convex(cfg);
    if (name == "second-derivative") return second_derivative(cfg);
    throw InvalidArgument("verify: unknown check '" + name + "'");
}

}  // namespace squeezelab::verify
