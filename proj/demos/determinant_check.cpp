// One 2-D path with σ = (σ1, 1), tested against H0: det ΣΣᵀ = 0.01 by every 2-D procedure.
//
//   determinant_check [sigma1] [seed]     defaults: 0.2 7

#include <cstdlib>
#include <iostream>

#include "sdetest/sdetest.hpp"

int main(int argc, char** argv) {
    using namespace sdetest;

    const double sigma1 = argc > 1 ? std::strtod(argv[1], nullptr) : 0.2;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;

    try {
        const DriftSpec drift = make_model("sincos2d", {1.0});
        SimConfig sim;
        sim.sigma = {sigma1, 1.0};
        sim.x0 = {0.0, 0.0};
        sim.seed = seed;
        const PathSample path = simulate(drift, sim);

        TestParams params;
        params.sigma0_sq = {0.01, 1.0};
        params.beta = 0.1;
        std::cout << "sigma1^2 = " << sigma1 * sigma1 << ", det = " << sigma1 * sigma1 << " vs det0 = 0.01, n = "
                  << path.increments() << "\n\n";
        for (TestId id : {TestId::Known2D, TestId::Estimated2D, TestId::MultipleKnown, TestId::MultipleEstimated}) {
            const Procedure procedure(id, drift, params, path.increments(), path.delta());
            const TestOutcome out = procedure.run(path);
            std::cout << to_string(id) << ": statistic " << out.statistic << ", critical " << out.critical_value
                      << (out.reject ? ", reject" : ", accept");
            if (out.p_value)
                std::cout << ", p " << (out.p_value_kind == PValueKind::UpperBound ? "<= " : "= ") << *out.p_value;
            if (out.min_detectable) std::cout << ", min detectable det " << *out.min_detectable;
            std::cout << '\n';
            for (const auto& w : out.warnings) std::cout << "  warning: " << w << '\n';
        }

        const auto bounds = concentration_bounds(0.01, path.increments(), 0.01);
        std::cout << "\nunder H0 with n = " << path.increments() << ": P(S - 2 det0 <= -0.01) <= " << bounds.lower_tail
                  << ", P(S - 2 det0 >= 0.01) <= " << bounds.upper_tail << '\n';
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
