// squeezelab: sweeps, exact coefficients, fits, invariant checks and
// Taylor/numeric comparisons for n-photon squeezed states.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "squeezelab/squeezelab.hpp"

namespace sl = squeezelab;

namespace {

enum Exit { exit_ok = 0, exit_usage = 1, exit_convergence = 2, exit_resource = 3, exit_verify = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--r: '" + text + "' is not start:stop:step");
        }
    }
    if (parts.size() != 3) throw UsageError("--r: expected start:stop:step, got '" + text + "'");
    if (parts[0] < 0.0) throw UsageError("--r: start must be >= 0");
    try {
        return sl::make_grid(parts[0], parts[1], parts[2]);
    } catch (const sl::InvalidArgument& e) {
        throw UsageError(std::string("--r: ") + e.what());
    }
}

std::vector<std::size_t> parse_truncations(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || item.front() == '-') {
            throw UsageError("--N: '" + text + "' is not a comma-separated list of positive integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw UsageError("--N: empty list");
    return out;
}

unsigned thread_budget() {
    unsigned threads = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SQUEEZELAB_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1) throw UsageError("SQUEEZELAB_THREADS must be a positive integer");
        threads = std::min(threads, static_cast<unsigned>(cap));
    }
    return threads;
}

// Output goes to `path`, or stdout when empty. Content is assembled first so
// a failed run never leaves a partial file behind.
void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content << std::flush;
        return;
    }
    const std::string tmp = path + ".partial";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
        os << content;
        if (!os.flush()) throw std::runtime_error("write to '" + path + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move output into '" + path + "'");
    }
}

sl::ExpMethod parse_method(const std::string& name) {
    if (name == "chebyshev") return sl::ExpMethod::chebyshev;
    if (name == "krylov") return sl::ExpMethod::krylov;
    throw UsageError("--method must be chebyshev or krylov");
}

void require_positive(double value, const char* flag) {
    if (!(value > 0.0) || !std::isfinite(value)) throw UsageError(std::string(flag) + " must be a positive number");
}

// Number of non-zero coefficients used by `coeffs` when --M is absent.
unsigned default_coeff_count(unsigned n) { return n == 4 ? 10 : 20; }

// Non-zero coefficients (powers 2..2M) feeding `fit` and `compare` when --M
// is absent. These windows reproduce the published growth rates.
unsigned default_fit_count(unsigned n) {
    if (n == 3) return 10;
    if (n == 4) return 5;
    return 10;
}

struct Common {
    unsigned n = 3;
    std::string r = "0:1:0.005";
    std::string truncations;
    double tol = 1e-13;
    std::string out;
    std::size_t tail = 0;
    double leak_tol = sl::default_leak_tol;
    double agree_tol = 1e-6;
    std::string method = "chebyshev";
    unsigned max_degree = sl::AlgebraBudget{}.max_degree;
    std::size_t max_terms = sl::AlgebraBudget{}.max_terms;
};

sl::SweepOptions sweep_options(const Common& c) {
    require_positive(c.tol, "--tol");
    sl::SweepOptions opts;
    opts.exp.tol = c.tol;
    opts.exp.method = parse_method(c.method);
    if (c.tail > 0) opts.tail = c.tail;
    opts.threads = thread_budget();
    return opts;
}

sl::AlgebraBudget budget(const Common& c) { return {c.max_degree, c.max_terms}; }

void check_order(unsigned n) {
    if (n < 1) throw UsageError("--n must be >= 1");
}

// Adjacent truncations that reach the same levels produce identical curves,
// which makes any agreement between them meaningless.
void warn_indistinguishable(unsigned n, std::size_t a, std::size_t b, const char* what) {
    if (!sl::truncations_distinguishable(n, a, b)) {
        std::cerr << what << ": warning: for n=" << n << " truncations " << a << " and " << b
                  << " reach the same levels and give identical results\n";
    }
}

int cmd_sweep(const Common& c) {
    check_order(c.n);
    const auto grid = parse_grid(c.r);
    const auto truncations = parse_truncations(c.truncations.empty() ? "2000,2001" : c.truncations);
    for (const auto N : truncations) {
        if (N <= c.n || N < 2) throw UsageError("--N: every truncation must exceed the order n and be >= 2");
        if (c.tail >= N) throw UsageError("--tail must be smaller than every N");
    }
    for (std::size_t i = 1; i < truncations.size(); ++i) {
        warn_indistinguishable(c.n, truncations[i - 1], truncations[i], "sweep");
    }
    const auto result = sl::sweep_photon_number(c.n, grid, truncations, sweep_options(c));
    std::ostringstream os;
    sl::io::write_sweep_csv(os, result);
    emit(c.out, os.str());
    if (result.failed_rows() > 0) {
        std::cerr << "sweep: " << result.failed_rows() << " row(s) failed to converge\n";
        return exit_convergence;
    }
    return exit_ok;
}

int cmd_coeffs(const Common& c, unsigned M, bool include_odd) {
    check_order(c.n);
    if (M == 0) M = default_coeff_count(c.n);
    const auto series = sl::coefficients(c.n, M, budget(c));
    std::ostringstream os;
    sl::io::write_coefficients_csv(os, series, include_odd);
    emit(c.out, os.str());
    return exit_ok;
}

int cmd_fit(const Common& c, unsigned M, const std::string& in, unsigned last) {
    sl::FitResult fit;
    unsigned used_M = M;
    if (!in.empty()) {
        std::ifstream is(in);
        if (!is) throw UsageError("--in: cannot read '" + in + "'");
        auto records = sl::io::read_coefficients_csv(is);
        if (M > 0) {
            std::erase_if(records, [M](const auto& rec) { return rec.m > 2 * M; });
        }
        used_M = static_cast<unsigned>(std::count_if(records.begin(), records.end(),
                                                     [](const auto& rec) { return rec.m >= 1 && !rec.is_zero(); }));
        fit = sl::io::fit_records(records, last);
    } else {
        check_order(c.n);
        if (used_M == 0) used_M = default_fit_count(c.n);
        fit = sl::fit_exponential(sl::coefficients(c.n, used_M, budget(c)), last);
    }
    emit(c.out, sl::io::fit_to_json(fit, used_M).dump(2) + "\n");
    return exit_ok;
}

int cmd_verify(const Common& c, const std::vector<std::string>& checks, std::size_t levels, bool n_given,
               bool r_given, double h) {
    sl::verify::Config cfg;
    if (n_given) {
        check_order(c.n);
        cfg.orders = {c.n};
        cfg.numeric_orders = {c.n};
    }
    if (!c.truncations.empty()) {
        const auto t = parse_truncations(c.truncations);
        if (t.size() != 2 || t[0] == t[1]) throw UsageError("--N: verify needs two distinct truncations");
        cfg.truncations = {t[0], t[1]};
    }
    for (const unsigned n : cfg.numeric_orders) {
        if (std::min(cfg.truncations.first, cfg.truncations.second) <= std::max(n, 2 * n)) {
            throw UsageError("--N: truncations must exceed 2n");
        }
        warn_indistinguishable(n, cfg.truncations.first, cfg.truncations.second, "verify");
    }
    if (r_given) cfg.r_grid = parse_grid(c.r);
    cfg.levels = levels;
    require_positive(c.leak_tol, "--leak-tol");
    require_positive(c.agree_tol, "--agree-tol");
    require_positive(h, "--fd-step");
    cfg.leak_tol = c.leak_tol;
    cfg.agree_tol = c.agree_tol;
    cfg.h = h;
    cfg.sweep = sweep_options(c);

    const auto& known = sl::verify::check_names();
    for (const auto& name : checks) {
        if (std::find(known.begin(), known.end(), name) == known.end()) {
            throw UsageError("--check: unknown check '" + name + "'");
        }
    }
    const auto& selected = checks.empty() ? sl::verify::default_checks() : checks;

    std::ostringstream os;
    bool all = true;
    for (const auto& name : selected) {
        const auto result = sl::verify::run(name, cfg);
        all = all && result.passed;
        os << (result.passed ? "PASS " : "FAIL ") << result.name << ": " << result.summary << '\n';
        for (const auto& line : result.lines) os << "    " << line << '\n';
    }
    os << (all ? "all checks passed" : "some checks FAILED") << '\n';
    emit(c.out, os.str());
    return all ? exit_ok : exit_verify;
}

int cmd_compare(const Common& c, unsigned M, const std::string& summary_path, bool r_given) {
    check_order(c.n);
    if (M == 0) M = default_fit_count(c.n);
    const auto grid = parse_grid(r_given ? c.r : "0:0.3:0.005");
    const auto t = parse_truncations(c.truncations.empty() ? "6000,6001" : c.truncations);
    if (t.size() != 2 || t[0] == t[1]) throw UsageError("--N: compare needs two distinct truncations");
    for (const auto N : t) {
        if (N <= c.n) throw UsageError("--N: every truncation must exceed the order n");
    }
    warn_indistinguishable(c.n, t[0], t[1], "compare");
    require_positive(c.agree_tol, "--agree-tol");
    const auto series = sl::coefficients(c.n, M, budget(c));
    const auto table = sl::compare_taylor_numeric(series, t[0], t[1], grid, c.agree_tol, sweep_options(c));

    std::optional<sl::FitResult> fit;
    try {
        fit = sl::fit_exponential(series, 5);
    } catch (const sl::InvalidArgument&) {
        // too few or non-positive coefficients: no radius estimate
    }
    std::ostringstream csv;
    sl::io::write_comparison_csv(csv, table);
    auto summary = sl::io::comparison_summary(table, fit ? &*fit : nullptr);
    summary["M"] = M;
    emit(c.out, csv.str());
    if (!summary_path.empty()) {
        emit(summary_path, summary.dump(2) + "\n");
    } else {
        std::cerr << summary.dump(2) << '\n';
    }
    const bool failed = std::any_of(table.rows.begin(), table.rows.end(),
                                    [](const auto& row) { return std::isnan(row.numeric_n) || std::isnan(row.numeric_nprime); });
    return failed ? exit_convergence : exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerics and exact series for n-photon squeezed states"};
    app.require_subcommand(1);

    Common c;
    auto add_common = [&c](CLI::App* sub) {
        sub->add_option("--n", c.n, "squeezing order n >= 1")->check(CLI::PositiveNumber);
        sub->add_option("--out", c.out, "output path (stdout when omitted)");
    };
    auto add_numeric = [&c](CLI::App* sub) {
        sub->add_option("--r", c.r, "r grid as start:stop:step");
        sub->add_option("--N", c.truncations, "comma-separated truncations");
        sub->add_option("--tol", c.tol, "exponential-action tolerance");
        sub->add_option("--tail", c.tail, "leakage tail (default max(10, 2n))");
        sub->add_option("--method", c.method, "chebyshev or krylov");
    };
    auto add_budget = [&c](CLI::App* sub) {
        sub->add_option("--max-degree", c.max_degree, "algebra budget: largest polynomial degree");
        sub->add_option("--max-terms", c.max_terms, "algebra budget: largest number of terms");
    };

    auto* sweep = app.add_subcommand("sweep", "<a+a> over an r grid and truncations (CSV)");
    add_common(sweep);
    add_numeric(sweep);

    unsigned M = 0;
    bool include_odd = false;
    auto* coeffs = app.add_subcommand("coeffs", "exact Taylor coefficients of <a+a> (CSV)");
    add_common(coeffs);
    add_budget(coeffs);
    coeffs->add_option("--M", M, "number of even powers 2..2M")->check(CLI::PositiveNumber);
    coeffs->add_flag("--include-odd", include_odd, "also list the vanishing odd powers");

    std::string in;
    unsigned last = 5;
    auto* fit = app.add_subcommand("fit", "log-linear growth fit and radius estimate (JSON)");
    add_common(fit);
    add_budget(fit);
    fit->add_option("--M", M, "use even powers 2..2M")->check(CLI::PositiveNumber);
    fit->add_option("--in", in, "coefficient CSV to fit instead of computing");
    fit->add_option("--last", last, "number of trailing non-zero coefficients")->check(CLI::Range(2U, 1000000U));

    std::vector<std::string> checks;
    std::size_t levels = 20;
    double h = 1e-3;
    auto* verify = app.add_subcommand("verify", "invariant suite (pass/fail per check)");
    add_common(verify);
    add_numeric(verify);
    verify->add_option("--check", checks, "check to run (repeatable); default runs the standard suite");
    verify->add_option("--levels", levels, "number states 0..levels for the closed-form check");
    verify->add_option("--leak-tol", c.leak_tol, "leakage threshold for certification");
    verify->add_option("--agree-tol", c.agree_tol, "relative agreement threshold for certification");
    verify->add_option("--fd-step", h, "finite-difference step for second-derivative");

    std::string summary_path;
    auto* compare = app.add_subcommand("compare", "Taylor partial sum against two truncations (CSV + JSON)");
    add_common(compare);
    add_numeric(compare);
    add_budget(compare);
    compare->add_option("--M", M, "Taylor series through power 2M")->check(CLI::PositiveNumber);
    compare->add_option("--agree-tol", c.agree_tol, "absolute agreement threshold");
    compare->add_option("--summary", summary_path, "summary JSON path (stderr when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }

    try {
        if (app.got_subcommand(sweep)) return cmd_sweep(c);
        if (app.got_subcommand(coeffs)) return cmd_coeffs(c, M, include_odd);
        if (app.got_subcommand(fit)) return cmd_fit(c, M, in, last);
        if (app.got_subcommand(verify)) {
            return cmd_verify(c, checks, levels, verify->count("--n") > 0, verify->count("--r") > 0, h);
        }
        if (app.got_subcommand(compare)) return cmd_compare(c, M, summary_path, compare->count("--r") > 0);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const sl::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const sl::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << " (residual estimate " << e.residual() << ")\n";
        return exit_convergence;
    } catch (const sl::ResourceError& e) {
        std::cerr << "error: " << e.what() << " (limit: " << e.parameter() << ")\n";
        return exit_resource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}
