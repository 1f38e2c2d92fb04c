#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

#include "sdetest/models.hpp"
#include "sdetest/simulate.hpp"
#include "sdetest/statistics.hpp"

using namespace sdetest;

namespace {

PathSample sin_path(double sigma, std::uint64_t seed, double theta = 1.0) {
    SimConfig cfg;
    cfg.sigma = {sigma};
    cfg.x0 = {0.0};
    cfg.seed = seed;
    return simulate(make_model("sin1d", {theta}), cfg);
}

PathSample path_from(double delta, std::vector<double> xs) { return PathSample(delta, 1, std::move(xs)); }

}  // namespace

TEST(RawIncrements, Examples) {
    const double delta = 0.04;
    const double root = std::sqrt(delta);
    const auto inc = raw_increments(path_from(delta, {0.0, root, 2.0 * root}));
    EXPECT_EQ(inc.kind, IncrementKind::Raw);
    EXPECT_NEAR(inc.values[0], 1.0, 1e-15);
    EXPECT_NEAR(inc.values[1], 1.0, 1e-15);
    EXPECT_EQ(inc.effective_dof, 2);

    for (double v : raw_increments(path_from(0.1, {3.0, 3.0, 3.0, 3.0})).values) EXPECT_EQ(v, 0.0);
    const double c = 2.5;
    for (double v : raw_increments(path_from(0.01, {0.0, c * 0.01, c * 0.02})).values)
        EXPECT_NEAR(v, c * 0.1, 1e-14);
    EXPECT_THROW(raw_increments(PathSample(0.1, 2, {0, 0, 1, 1})), ConfigError);
}

TEST(CenteredKnown, ZeroDriftLeavesRawIncrements) {
    const auto path = sin_path(0.2, 3);
    EXPECT_EQ(centered_increments_known(path, DriftSpec::zero(1)).values, raw_increments(path).values);
}

TEST(CenteredKnown, MatchesQuadratureOracle) {
    const auto path = sin_path(0.1, 7);
    const auto inc = centered_increments_known(path, make_model("sin1d", {1.0}));
    const auto raw = raw_increments(path);
    for (std::size_t i = 1; i <= inc.size(); ++i) {
        const double a = (i - 1) * 0.01;
        const double quad = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            [](double t) { return std::sin(t); }, a, a + 0.01);
        EXPECT_NEAR(inc.values[i - 1], raw.values[i - 1] - quad / 0.1, 1e-10);
    }
    EXPECT_THROW(centered_increments_known(path, DriftSpec::linear_time({TimeFunction::sine()}, std::nullopt)),
                 ConfigError);
}

TEST(CenteredKnown, NoiselessPathLeavesOnlyEulerBias) {
    const auto inc = centered_increments_known(sin_path(0.0, 1), make_model("sin1d", {1.0}));
    for (double v : inc.values) EXPECT_LT(std::abs(v), 1e-3);
}

TEST(CenteredEuler, SubtractsLeftPointDrift) {
    const auto drift = make_model("ou1d", {2.0}, 1.0);
    const auto path = path_from(0.25, {1.0, 0.5, 0.75});
    const auto inc = centered_increments_euler(path, drift);
    EXPECT_EQ(inc.kind, IncrementKind::CenteredEulerApprox);
    EXPECT_NEAR(inc.values[0], (0.5 - 1.0 - 0.25 * -2.0 * 1.0) / 0.5, 1e-15);
    EXPECT_NEAR(inc.values[1], (0.75 - 0.5 - 0.25 * -2.0 * 0.5) / 0.5, 1e-15);
}

TEST(FitLinearDrift, ConstantBasisTelescopes) {
    const auto path = sin_path(0.3, 4);
    const std::vector<TimeFunction> basis{TimeFunction::constant(1.0)};
    const auto fit = fit_linear_drift(path, basis, 40);
    EXPECT_NEAR(fit.theta_hat[0], (path.at(40, 0) - path.at(0, 0)) / (40 * 0.01), 1e-10);
    EXPECT_NEAR(fit.design_norms[0], 40 * 0.01 * 0.01, 1e-15);
}

TEST(FitLinearDrift, NoiselessPathRecoversTheta) {
    const std::vector<TimeFunction> basis{TimeFunction::sine()};
    const auto fit = fit_linear_drift(sin_path(0.0, 1, 2.5), basis, 100);
    EXPECT_NEAR(fit.theta_hat[0], 2.5, 0.02);
}

TEST(FitLinearDrift, MonteCarloMeanAndVariance) {
    const std::vector<TimeFunction> basis{TimeFunction::sine()};
    const int reps = 2000;
    double sum = 0.0;
    double sum_sq = 0.0;
    double predicted = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto fit = fit_linear_drift(sin_path(0.1, 1000 + r), basis, 100, std::vector<double>{0.01});
        sum += fit.theta_hat[0];
        sum_sq += fit.theta_hat[0] * fit.theta_hat[0];
        predicted = fit.theta_var[0];
    }
    const double mean = sum / reps;
    const double var = sum_sq / reps - mean * mean;
    // Euler discretisation shifts θ̂ by O(Δ); allow it on top of 3 SE.
    EXPECT_NEAR(mean, 1.0, 3.0 * std::sqrt(predicted / reps) + 0.01);
    EXPECT_NEAR(var / predicted, 1.0, 0.1);
}

TEST(FitLinearDrift, Errors) {
    const auto path = sin_path(0.1, 2);
    const std::vector<TimeFunction> zero{TimeFunction::constant(0.0)};
    EXPECT_THROW(fit_linear_drift(path, zero, 50), ZeroDesignError);
    const std::vector<TimeFunction> basis{TimeFunction::sine()};
    EXPECT_THROW(fit_linear_drift(path, basis, 0), LengthError);
    EXPECT_THROW(fit_linear_drift(path, basis, 101), LengthError);
}

TEST(Projection, Invariants) {
    const auto proj = projection_data(TimeFunction::sine(), 60, 0.05);
    const Eigen::Index n = 60;
    const Eigen::MatrixXd h = proj.h();
    const Eigen::MatrixXd complement = Eigen::MatrixXd::Identity(n, n) - h;
    EXPECT_NEAR(proj.trace_h, 1.0, 1e-10);
    EXPECT_LT((complement * complement - complement).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((proj.c.transpose() * proj.c - Eigen::MatrixXd::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((proj.c * proj.c.transpose() - complement).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(proj.c.cols(), n - 1);
}

TEST(Projection, FirstUnitVector) {
    // ∫ over the first increment only: an indicator basis on [0, Δ).
    const TimeFunction indicator{[](double t) { return t < 0.1 ? 1.0 : 0.0; },
                                 [](double t) { return std::min(t, 0.1); }};
    const auto proj = projection_data(indicator, 5, 0.1);
    const Eigen::MatrixXd h = proj.h();
    EXPECT_NEAR(h(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(h.sum(), 1.0, 1e-15);
    EXPECT_LT(proj.c.row(0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, NormIdentityOnRandomVectors) {
    const auto proj = projection_data(TimeFunction::cosine(), 40, 0.1);
    const Eigen::MatrixXd complement = Eigen::MatrixXd::Identity(40, 40) - proj.h();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd v(40);
        for (auto& x : v) x = normal(rng);
        EXPECT_NEAR((proj.c.transpose() * v).squaredNorm(), (complement * v).squaredNorm(), 1e-10);
    }
}

TEST(Projection, ZeroDesign) {
    EXPECT_THROW(projection_data(TimeFunction::constant(0.0), 10, 0.1), ZeroDesignError);
}

TEST(CenteredEstimated, NormIdentityAndDof) {
    const std::vector<TimeFunction> basis{TimeFunction::sine()};
    const auto proj = projection_data(basis[0], 100, 0.01);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto path = sin_path(0.2, seed);
        const auto fit = fit_linear_drift(path, basis, 100);
        const auto inc = centered_increments_estimated(path, fit, basis[0]);
        EXPECT_EQ(inc.effective_dof, 99);
        const double direct = inc.sum_of_squares();
        EXPECT_NEAR(transformed_increments(inc, proj).squaredNorm(), direct, 1e-8 * direct);
    }
}

TEST(CenteredEstimated, ConstantBasisSubtractsMean) {
    const std::vector<TimeFunction> basis{TimeFunction::constant(1.0)};
    const auto path = sin_path(0.2, 9);
    const auto raw = raw_increments(path);
    double mean = 0.0;
    for (double v : raw.values) mean += v;
    mean /= static_cast<double>(raw.size());
    const auto inc = centered_increments_estimated(path, fit_linear_drift(path, basis, 100), basis[0]);
    for (std::size_t i = 0; i < inc.size(); ++i) EXPECT_NEAR(inc.values[i], raw.values[i] - mean, 1e-12);
}

TEST(CenteredEstimated, NoiselessPathIsNearZero) {
    const std::vector<TimeFunction> basis{TimeFunction::sine()};
    const auto path = sin_path(0.0, 1);
    const auto inc = centered_increments_estimated(path, fit_linear_drift(path, basis, 100), basis[0]);
    for (double v : inc.values) EXPECT_LT(std::abs(v), 1e-3);
}

TEST(CenteredEstimated, RequiresFullSampleFit) {
    const std::vector<TimeFunction> basis{TimeFunction::sine()};
    const auto path = sin_path(0.1, 1);
    EXPECT_THROW(centered_increments_estimated(path, fit_linear_drift(path, basis, 50), basis[0]), ConfigError);
}

TEST(PairDeterminant, Examples) {
    EXPECT_EQ(pair_determinant({{{{1.0, 0.0}}, {{0.0, 1.0}}}}), 1.0);
    EXPECT_EQ(pair_determinant({{{{0.3, -1.2}}, {{0.3, -1.2}}}}), 0.0);
    EXPECT_NEAR(pair_determinant({{{{1.0, 2.0}}, {{3.0, 4.0}}}}), 4.0, 1e-15);
}

TEST(PairedIncrements, KnownDriftLayout) {
    SimConfig cfg;
    cfg.sigma = {0.5, 1.2};
    cfg.x0 = {0.0, 0.0};
    cfg.seed = 3;
    const auto drift = make_model("sincos2d", {1.0, 1.0});
    const auto path = simulate(drift, cfg);
    const auto pairs = paired_increments_2d(path, drift);
    ASSERT_EQ(pairs.size(), 50u);
    const double root = 0.1;
    const double expected = (path.at(4, 1) - path.at(3, 1) - (std::sin(0.04) - std::sin(0.03))) / root;
    EXPECT_NEAR(pairs.xi[1][1][1], expected, 1e-12);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        EXPECT_GE(pairs.s[p], 0.0);
        EXPECT_DOUBLE_EQ(pairs.s[p], pair_determinant(pairs.xi[p]));
    }
}

TEST(PairedIncrements, OddWindowIsALengthError) {
    const PathSample path(0.1, 2, std::vector<double>(8, 0.0));  // 3 increments
    EXPECT_THROW(paired_increments_2d(path, DriftSpec::zero(2)), LengthError);
    EXPECT_NO_THROW(paired_increments_2d(path, DriftSpec::zero(2), 2));
}

TEST(PairedIncrements, EstimatedModeLeverage) {
    SimConfig cfg;
    cfg.sigma = {0.1, 1.0};
    cfg.x0 = {0.0, 0.0};
    cfg.seed = 8;
    const auto path = simulate(make_model("sincos2d", {1.0, 1.0}), cfg);
    const std::vector<TimeFunction> basis{TimeFunction::sine(), TimeFunction::cosine()};
    const auto plan = split_plan(100);
    const auto fit = fit_linear_drift(path, basis, plan.n_e);
    const auto pairs = paired_increments_2d(path, fit, basis, plan.test_start);
    EXPECT_EQ(pairs.size(), 24u);
    EXPECT_EQ(pairs.first_increment, 53u);
    const double integral = std::cos(0.52) - std::cos(0.53);
    EXPECT_NEAR(pairs.leverage[0][0][0], integral * integral / fit.design_norms[0], 1e-15);
}

TEST(SplitPlan, Parity) {
    const auto plan = split_plan(100);
    EXPECT_EQ(plan.n_e, 51u);
    EXPECT_EQ(plan.test_start, 53u);
    EXPECT_EQ(plan.n_t, 49u);
    EXPECT_FALSE(plan.warning);
    const auto adjusted = split_plan(100, 40);
    EXPECT_EQ(adjusted.n_e, 41u);
    EXPECT_TRUE(adjusted.warning);
    EXPECT_EQ(split_plan(100, 41).n_e, 41u);
    EXPECT_THROW(split_plan(99), LengthError);
    EXPECT_THROW(split_plan(4, 3), LengthError);
}
