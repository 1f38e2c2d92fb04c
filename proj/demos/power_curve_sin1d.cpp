// Power of the three 1-D tests for dX = sin(t) dt + σ dW against σ² (H0: σ² = 0.01).
//
//   power_curve_sin1d [N] [T] [delta]     defaults: 1000 1 0.01

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "sdetest/sdetest.hpp"

int main(int argc, char** argv) {
    using namespace sdetest;

    Scenario sc;
    sc.replicates = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1000;
    sc.horizon = argc > 2 ? std::strtod(argv[2], nullptr) : 1.0;
    sc.delta = argc > 3 ? std::strtod(argv[3], nullptr) : 0.01;
    sc.fine_step = std::min(0.01, sc.delta);
    sc.sigma_grid_start = 0.004;
    sc.sigma_grid_stop = 0.04;
    sc.sigma_grid_step = 0.004;

    try {
        const PowerCurve curve = estimate_power(to_study(sc, "sin1d demo"));

        TestConfig1D cfg;
        cfg.alpha = sc.alpha;
        cfg.sigma0_sq = sc.sigma0_sq[0];
        cfg.beta = 0.1;
        const auto n = static_cast<std::size_t>(sc.horizon / sc.delta + 0.5);
        std::cout << "n = " << n << ", N = " << sc.replicates << ", sigma0^2 = " << cfg.sigma0_sq << "\n"
                  << "min detectable sigma^2 (beta = 0.1): known drift "
                  << min_detectable_sigma_1d(cfg, n, Variant1D::CenteredKnown) << ", estimated drift "
                  << min_detectable_sigma_1d(cfg, n, Variant1D::CenteredEstimated) << "\n\n";

        std::cout << std::setw(10) << "sigma^2";
        for (TestId id : curve.tests) std::cout << std::setw(24) << to_string(id);
        std::cout << '\n' << std::fixed;
        for (std::size_t g = 0; g < curve.sigma_sq.size(); ++g) {
            std::cout << std::setw(10) << std::setprecision(3) << curve.sigma_sq[g];
            for (std::size_t t = 0; t < curve.tests.size(); ++t)
                std::cout << std::setw(16) << std::setprecision(4) << curve.power[g][t] << " +- " << std::setw(5)
                          << std::setprecision(3) << curve.mc_se[g][t];
            std::cout << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
