// Exact Taylor coefficients of <a+a> for n = 2, 3, 4 with the fitted growth
// rate and the resulting radius estimate.

#include <cstdio>

#include "squeezelab/series_analysis.hpp"

using namespace squeezelab;

int main() {
    for (const unsigned n : {2u, 3u, 4u}) {
        const unsigned M = n == 4 ? 5 : 10;
        const auto series = coefficients(n, M);
        std::printf("n=%u\n", n);
        for (const auto& e : series.entries) {
            if (e.m == 0 || e.m % 2 == 1) continue;
            std::printf("  c_%-3u = %s\n", e.m, to_decimal(e.c).c_str());
        }
        try {
            const auto fit = fit_exponential(series, 5);
            std::printf("  alpha = %.4f +- %.4f, radius = %.4f\n", fit.alpha, fit.alpha_stderr, fit.radius);
        } catch (const InvalidArgument& e) {
            std::printf("  no fit: %s\n", e.what());
        }
    }
}
