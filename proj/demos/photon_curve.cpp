// Mean photon number of the tri-squeezed vacuum at two neighbouring
// truncations, printed as a table with the relative gap between them.
// 4000 levels reach level 3999 = 3 * 1333, which 3999 levels do not.

#include <cstdio>

#include "squeezelab/evolve.hpp"

using namespace squeezelab;

int main() {
    const std::size_t na = 3999;
    const std::size_t nb = 4000;
    const auto sweep = sweep_photon_number(3, make_grid(0.0, 0.3, 0.02), {na, nb});
    const auto a = sweep.curve(na);
    const auto b = sweep.curve(nb);
    std::printf("%6s %22s %22s %12s %12s\n", "r", "<n> N=3999", "<n> N=4000", "rel gap", "leakage");
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::printf("%6.2f %22.12g %22.12g %12.3e %12.3e\n", a[i].r, a[i].mean_photon, b[i].mean_photon,
                    relative_difference(a[i].mean_photon, b[i].mean_photon), a[i].leakage);
    }
    std::printf("converged region: r <= %.2f\n", converged_region(sweep, na, nb, default_leak_tol, 1e-6));
}
