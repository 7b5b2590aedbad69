#pragma once

// CSV and JSON serialisation of sweeps, coefficient series, fits and
// Taylor/numeric comparisons. Floating values carry 17 significant digits;
// exact rationals are written as integer strings.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "squeezelab/boson_algebra.hpp"
#include "squeezelab/errors.hpp"
#include "squeezelab/evolve.hpp"
#include "squeezelab/series_analysis.hpp"

namespace squeezelab::io {

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline constexpr const char* sweep_header = "n,N,r,mean_photon,leakage,norm_error,status";

inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
    os << sweep_header << '\n';
    for (const auto& row : sweep.rows) {
        os << sweep.n << ',' << row.N << ',' << format_double(row.r) << ',' << format_double(row.mean_photon) << ','
           << format_double(row.leakage) << ',' << format_double(row.norm_error) << ','
           << (row.status == RowStatus::ok ? "ok" : "failed") << '\n';
    }
}

inline constexpr const char* coefficients_header = "n,m,numerator,denominator,decimal";

/// One row per even power 2..2M, or every power 0..2M with include_odd.
inline void write_coefficients_csv(std::ostream& os, const CoefficientSeries& series, bool include_odd = false) {
    os << coefficients_header << '\n';
    for (const auto& e : series.entries) {
        if (!include_odd && (e.m == 0 || e.m % 2 == 1)) continue;
        os << series.n << ',' << e.m << ',' << e.c.get_num().get_str() << ',' << e.c.get_den().get_str() << ','
           << to_decimal(e.c) << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(0, 1);
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

/// One parsed coefficient row. `exact` is set when numerator and denominator
/// are present; otherwise only the decimal column is available.
struct CoefficientRecord {
    unsigned n = 0;
    unsigned m = 0;
    std::optional<mpq_class> exact;
    double decimal = 0.0;

    /// ln|c|, from the exact value when available.
    double log_abs_value() const {
        if (exact) return log_abs(*exact);
        return std::log(std::abs(decimal));
    }

    bool is_zero() const { return exact ? *exact == 0 : decimal == 0.0; }
    bool is_negative() const { return exact ? *exact < 0 : decimal < 0.0; }
};

/// Reads the `n,m,numerator,denominator,decimal` schema written by
/// write_coefficients_csv. Hand-written files may leave numerator and
/// denominator empty.
inline std::vector<CoefficientRecord> read_coefficients_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("coefficient CSV is empty");
    const auto header = detail::split_csv_line(line);
    if (header != detail::split_csv_line(coefficients_header)) {
        throw InvalidArgument("coefficient CSV header must be '" + std::string(coefficients_header) + "'");
    }
    std::vector<CoefficientRecord> records;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 5) {
            throw InvalidArgument("coefficient CSV line " + std::to_string(line_no) + ": expected 5 fields");
        }
        try {
            CoefficientRecord rec;
            rec.n = static_cast<unsigned>(std::stoul(f[0]));
            rec.m = static_cast<unsigned>(std::stoul(f[1]));
            if (!f[2].empty() && !f[3].empty()) {
                mpq_class q{mpz_class{f[2]}, mpz_class{f[3]}};
                if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
                q.canonicalize();
                rec.exact = q;
                rec.decimal = q.get_d();
            } else {
                rec.decimal = std::stod(f[4]);
            }
            records.push_back(std::move(rec));
        } catch (const std::invalid_argument&) {
            throw InvalidArgument("coefficient CSV line " + std::to_string(line_no) + ": malformed number");
        } catch (const std::out_of_range&) {
            throw InvalidArgument("coefficient CSV line " + std::to_string(line_no) + ": number out of range");
        }
    }
    return records;
}

/// Fit over the last `last_points` non-zero records with m >= 1.
inline FitResult fit_records(const std::vector<CoefficientRecord>& records, std::size_t last_points = 5) {
    if (records.empty()) throw InvalidArgument("fit: no coefficient records");
    std::vector<const CoefficientRecord*> nonzero;
    for (const auto& rec : records) {
        if (rec.m >= 1 && !rec.is_zero()) nonzero.push_back(&rec);
    }
    std::sort(nonzero.begin(), nonzero.end(), [](auto* a, auto* b) { return a->m < b->m; });
    if (nonzero.size() < last_points || last_points < 2) {
        throw InvalidArgument("fit: " + std::to_string(nonzero.size()) + " non-zero coefficients, window needs " +
                              std::to_string(last_points));
    }
    std::vector<unsigned> m;
    std::vector<double> log_c;
    for (std::size_t i = nonzero.size() - last_points; i < nonzero.size(); ++i) {
        if (nonzero[i]->is_negative()) {
            throw InvalidArgument("fit: coefficient at m=" + std::to_string(nonzero[i]->m) +
                                  " is negative; logarithm undefined");
        }
        m.push_back(nonzero[i]->m);
        log_c.push_back(nonzero[i]->log_abs_value());
    }
    return fit_log_linear(records.front().n, m, log_c);
}

/// Flat record {n, M, points_used, alpha, alpha_stderr, radius}.
inline nlohmann::ordered_json fit_to_json(const FitResult& fit, unsigned M) {
    nlohmann::ordered_json j;
    j["n"] = fit.n;
    j["M"] = M;
    j["points_used"] = fit.points_used;
    j["alpha"] = fit.alpha;
    j["alpha_stderr"] = fit.alpha_stderr;
    j["radius"] = fit.radius;
    return j;
}

inline constexpr const char* comparison_header = "r,numeric_N,numeric_Nprime,taylor,diff_num,diff_taylor,converged";

inline void write_comparison_csv(std::ostream& os, const ComparisonTable& table) {
    os << comparison_header << '\n';
    for (const auto& row : table.rows) {
        os << format_double(row.r) << ',' << format_double(row.numeric_n) << ',' << format_double(row.numeric_nprime)
           << ',' << format_double(row.taylor) << ',' << format_double(row.diff_num) << ','
           << format_double(row.diff_taylor) << ',' << (row.converged ? "true" : "false") << '\n';
    }
}

inline nlohmann::ordered_json comparison_summary(const ComparisonTable& table, const FitResult* fit) {
    nlohmann::ordered_json j;
    j["n"] = table.n;
    j["N"] = table.truncation;
    j["N_prime"] = table.truncation_prime;
    j["max_order"] = table.max_order;
    j["agree_tol"] = table.agree_tol;
    if (fit) {
        j["alpha"] = fit->alpha;
        j["estimated_radius"] = fit->radius;
    } else {
        j["alpha"] = nullptr;
        j["estimated_radius"] = nullptr;
    }
    const auto disagree = table.first_numeric_disagreement();
    j["first_numeric_disagreement_r"] = disagree ? nlohmann::ordered_json(*disagree) : nlohmann::ordered_json(nullptr);
    const auto unconverged = table.first_unconverged();
    j["first_unconverged_r"] = unconverged ? nlohmann::ordered_json(*unconverged) : nlohmann::ordered_json(nullptr);
    return j;
}

}  // namespace squeezelab::io
