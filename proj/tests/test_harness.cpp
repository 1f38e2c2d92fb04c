#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sdetest/harness.hpp"
#include "sdetest/models.hpp"
#include "sdetest/scenario.hpp"

using namespace sdetest;

namespace {

PowerStudySpec small_study(unsigned threads) {
    Scenario sc;
    sc.sigma_grid_start = 0.005;
    sc.sigma_grid_stop = 0.02;
    sc.sigma_grid_step = 0.005;
    sc.replicates = 200;
    sc.seed = 17;
    auto spec = to_study(sc, "small");
    spec.threads = threads;
    return spec;
}

PathSample simulate_model(const std::string& model, std::vector<double> sigma, std::uint64_t seed) {
    SimConfig cfg;
    cfg.sigma = sigma;
    cfg.x0.assign(sigma.size(), 0.0);
    cfg.seed = seed;
    return simulate(make_model(model, {1.0}, 1.0), cfg);
}

}  // namespace

TEST(Procedure, FastPathAgreesWithFullOutcome) {
    struct Case {
        TestId id;
        std::string model;
        std::vector<double> sigma0_sq;
    };
    const std::vector<Case> cases{
        {TestId::Noncentered1D, "sin1d", {0.01}},
        {TestId::CenteredKnown1D, "sin1d", {0.01}},
        {TestId::CenteredEstimated1D, "sin1d", {0.01}},
        {TestId::StateDependent1D, "ou1d", {0.01}},
        {TestId::Known2D, "sincos2d", {0.01, 1.0}},
        {TestId::Estimated2D, "sincos2d", {0.01, 1.0}},
        {TestId::MultipleKnown, "sincos2d", {0.01, 1.0}},
        {TestId::MultipleEstimated, "sincos2d", {0.01, 1.0}},
    };
    for (const auto& c : cases) {
        const auto model = make_model(c.model, {1.0}, 1.0);
        TestParams params;
        params.sigma0_sq = c.sigma0_sq;
        params.eta = 0.5;
        params.approx_constant = 0.1;
        const Procedure procedure(c.id, model, params, 100, 0.01);
        int rejections = 0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            std::vector<double> sigma;
            for (double s : c.sigma0_sq) sigma.push_back(std::sqrt(s) * (0.8 + 0.02 * static_cast<double>(seed)));
            const auto path = simulate_model(c.model, sigma, seed);
            const auto outcome = procedure.run(path);
            EXPECT_EQ(outcome.reject, procedure.rejects(path)) << to_string(c.id) << " seed " << seed;
            EXPECT_DOUBLE_EQ(outcome.critical_value, procedure.critical_value()) << to_string(c.id);
            rejections += outcome.reject;
        }
        EXPECT_GT(rejections, 0) << to_string(c.id);
        EXPECT_LT(rejections, 40) << to_string(c.id);
    }
}

TEST(Procedure, DimensionMismatchAndOddLength) {
    TestParams params;
    params.sigma0_sq = {0.01};
    const Procedure one(TestId::CenteredKnown1D, make_model("sin1d", {1.0}), params, 100, 0.01);
    EXPECT_THROW(one.run(simulate_model("sincos2d", {0.1, 1.0}, 1)), ConfigError);

    params.sigma0_sq = {0.01, 1.0};
    const Procedure two(TestId::Known2D, make_model("sincos2d", {1.0}), params, 101, 0.01);
    EXPECT_FALSE(two.warnings().empty());
}

TEST(Harness, DeterministicAcrossThreadCounts) {
    const auto a = estimate_power(small_study(1));
    const auto b = estimate_power(small_study(3));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.sigma_sq.size(), 4u);
    EXPECT_EQ(a.replicates, 200u);
    for (std::size_t g = 0; g < a.sigma_sq.size(); ++g)
        for (std::size_t t = 0; t < a.tests.size(); ++t) {
            const double p = a.power[g][t];
            EXPECT_NEAR(a.mc_se[g][t], std::sqrt(p * (1.0 - p) / 200.0), 1e-15);
        }
    EXPECT_GT(a.power_at(3, TestId::CenteredKnown1D), a.power_at(0, TestId::CenteredKnown1D));
}

TEST(Harness, SingleReplicateGivesZeroOrOne) {
    auto spec = small_study(1);
    spec.replicates = 1;
    const auto curve = estimate_power(spec);
    for (const auto& row : curve.power)
        for (double p : row) EXPECT_TRUE(p == 0.0 || p == 1.0);
}

TEST(Harness, StreamKeys) {
    const auto spec = small_study(1);
    EXPECT_TRUE(stream_keys_unique(spec));
    EXPECT_EQ(stream_keys(spec).size(), 800u);
    EXPECT_EQ(replicate_key(0, 1, 0), std::uint64_t{1} << 40);
    EXPECT_NE(replicate_key(5, 0, 1), replicate_key(5, 1, 0));
}

TEST(Harness, Validation) {
    auto spec = small_study(1);
    spec.replicates = 0;
    EXPECT_THROW(estimate_power(spec), ConfigError);
    spec = small_study(1);
    spec.sigma_sq_grid = {0.02, 0.01};
    EXPECT_THROW(estimate_power(spec), ConfigError);
    spec = small_study(1);
    spec.tests.clear();
    EXPECT_THROW(estimate_power(spec), ConfigError);
}

TEST(Harness, ReplicateFailureNamesGridAndReplicate) {
    auto spec = small_study(2);
    spec.model = DriftSpec::state_dependent({[](double x) { return x * x; }}, 1.0);
    spec.sim.x0 = {10.0};
    spec.sim.horizon = 3.0;
    spec.sim.obs_step = 0.1;
    spec.sim.fine_step = 0.1;
    spec.tests = {TestId::StateDependent1D};
    spec.params.eta = 0.5;
    spec.params.approx_constant = 1.0;
    try {
        estimate_power(spec);
        FAIL() << "expected a harness error";
    } catch (const HarnessError& e) {
        EXPECT_LT(e.grid(), 4u);
        EXPECT_LT(e.replicate(), 200u);
        EXPECT_NE(std::string(e.what()).find("replicate"), std::string::npos);
    }
}

TEST(Harness, Type1Calibration) {
    auto spec = small_study(1);
    spec.sigma_sq_grid = {0.01};
    spec.replicates = 1000;
    const auto rates = calibrate_type1(spec);
    ASSERT_EQ(rates.size(), 3u);
    for (double r : rates) EXPECT_NEAR(r, 0.05, 3.0 * std::sqrt(0.05 * 0.95 / 1000));
    spec.sigma_sq_grid = {0.02};
    EXPECT_THROW(calibrate_type1(spec), ConfigError);
}

TEST(MakeGrid, PowerStudyGrid) {
    const auto grid = make_grid(0.004, 0.36, 0.004);
    ASSERT_EQ(grid.size(), 90u);
    EXPECT_DOUBLE_EQ(grid.front(), 0.004);
    EXPECT_EQ(grid.back(), 0.36);
    EXPECT_EQ(grid[8], 0.036);
    EXPECT_EQ(make_grid(0.001, 0.36, 0.001).size(), 360u);
    EXPECT_THROW(make_grid(0.1, 0.0, 0.01), ConfigError);
    EXPECT_THROW(make_grid(0.0, 1.0, 0.0), ConfigError);
}

TEST(PowerCsv, Format) {
    PowerCurve curve;
    curve.sigma_sq = {0.004};
    curve.tests = {TestId::CenteredKnown1D};
    curve.power = {{0.25}};
    curve.mc_se = {{0.125}};
    curve.replicates = 4;
    std::ostringstream out;
    write_power_csv(out, curve);
    EXPECT_EQ(out.str(), "sigma_sq,1d-centered-known_power,1d-centered-known_se\n0.004,0.25,0.125\n");
}

TEST(Scenario, ParseAndDefaults) {
    std::istringstream in("# comment\nmodel = sincos2d\ntheta = 1, 2\nsigma0_sq = 0.01,1\nN=100 # trailing\n"
                          "tests = 2d-known, multi-known\nbeta = 0.1\n\n");
    const auto sc = parse_scenario(in);
    EXPECT_EQ(sc.model, "sincos2d");
    EXPECT_EQ(sc.theta, (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(sc.replicates, 100u);
    EXPECT_EQ(sc.tests, (std::vector<TestId>{TestId::Known2D, TestId::MultipleKnown}));
    EXPECT_EQ(*sc.beta, 0.1);
    EXPECT_EQ(sc.delta, 0.01);
    const auto spec = to_study(sc);
    EXPECT_EQ(spec.sim.sigma, (std::vector<double>{0.1, 1.0}));
    EXPECT_EQ(spec.sigma_sq_grid.size(), 90u);
}

TEST(Scenario, Errors) {
    std::istringstream unknown("colour = red\n");
    EXPECT_THROW(parse_scenario(unknown), ConfigError);
    std::istringstream bad_number("alpha = lots\n");
    EXPECT_THROW(parse_scenario(bad_number), ConfigError);
    std::istringstream bad_test("tests = 3d-known\n");
    EXPECT_THROW(parse_scenario(bad_test), ConfigError);
    std::istringstream no_equals("model sin1d\n");
    EXPECT_THROW(parse_scenario(no_equals), ConfigError);
    Scenario sc;
    sc.model = "sincos2d";
    EXPECT_THROW(to_study(sc), ConfigError);
}

TEST(Scenario, MetadataRoundTrip) {
    Scenario sc;
    sc.model = "ou1d";
    sc.theta = {0.7};
    sc.eta = 0.3;
    sc.approx_constant = 2.0;
    sc.beta = 0.1;
    sc.x0 = {0.25};
    sc.tests = {TestId::StateDependent1D};
    sc.seed = 12345;
    std::stringstream text;
    write_metadata(text, scenario_metadata(sc));
    const auto back = parse_scenario(text);
    EXPECT_EQ(scenario_metadata(back), scenario_metadata(sc));
}
