#pragma once

// Determinant test of H0: det Σ = det0 against det Σ > det0 for a 2-D path,
// and the Bonferroni multiple test over coordinates.
//
// With s_i the squared determinant of a pair of centred increments,
// E s = 2 det and Var s = 20 det². Chebyshev on the mean of n/2 pairs gives the
// threshold 2 det0 (√(10/(nα)) + 1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sdetest/drift.hpp"
#include "sdetest/errors.hpp"
#include "sdetest/outcome.hpp"
#include "sdetest/path_csv.hpp"
#include "sdetest/simulate.hpp"
#include "sdetest/statistics.hpp"
#include "sdetest/tests_1d.hpp"

namespace sdetest {

struct TestConfig2D {
    double alpha = 0.05;
    double det0 = 1.0;
    std::optional<double> beta;
    std::optional<std::size_t> n_e;  // split point for the estimated variant

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
        if (!(det0 > 0.0) || !std::isfinite(det0)) throw ConfigError("det0 must be > 0");
        if (beta) {
            if (!(*beta > 0.0 && *beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
            if (1.0 - *beta < alpha) throw ConfigError("need 1 - beta >= alpha");
        }
    }
};

enum class Variant2D { Known, Estimated };

/// 2 det0 (√(10/(n α)) + 1).
inline double determinant_critical(double det0, double n_eff, double alpha) {
    return 2.0 * det0 * (std::sqrt(10.0 / (n_eff * alpha)) + 1.0);
}

/// Chebyshev tail surrogate min(1, 40 det0² / (n (S - 2 det0)²)) for S > 2 det0.
inline double determinant_p_bound(double statistic, double det0, double n_eff) {
    const double excess = statistic - 2.0 * det0;
    if (!(excess > 0.0)) return 1.0;
    return std::min(1.0, 40.0 * det0 * det0 / (n_eff * excess * excess));
}

/// Smallest n_eff for which the β-condition of the min-detectable bound holds.
inline std::size_t min_detectable_required_n(Variant2D variant, double beta) {
    const double factor = variant == Variant2D::Known ? 24.0 : 48.0;
    return static_cast<std::size_t>(std::floor(factor * -std::log(beta))) + 1;
}

/// Separation above which the Type II error is <= β.
///   known:     det0 (√(10/(nα)) + 1) / (1 - 2√(6 log(1/β)/n)),    n   > 24 log(1/β)
///   estimated: det0 (√(10/(n_t α)) + 1) / (1 - 4√(3 log(1/β)/n_t)), n_t > 48 log(1/β)
inline double min_detectable_det(const TestConfig2D& cfg, std::size_t n_eff, Variant2D variant) {
    cfg.validate();
    if (!cfg.beta) throw ConfigError("min_detectable_det needs beta");
    const double log_inv_beta = -std::log(*cfg.beta);
    const double n = static_cast<double>(n_eff);
    const bool known = variant == Variant2D::Known;
    if (n <= (known ? 24.0 : 48.0) * log_inv_beta)
        throw LengthError("min_detectable_det: n=" + std::to_string(n_eff) + " too small for beta=" +
                          format_double(*cfg.beta) + "; need n >= " +
                          std::to_string(min_detectable_required_n(variant, *cfg.beta)));
    const double shrink = known ? 1.0 - 2.0 * std::sqrt(6.0 * log_inv_beta / n)
                                : 1.0 - 4.0 * std::sqrt(3.0 * log_inv_beta / n);
    return cfg.det0 * (std::sqrt(10.0 / (n * cfg.alpha)) + 1.0) / shrink;
}

struct ConcentrationBounds {
    double lower_tail;  // P(S - 2 det <= -t)
    double upper_tail;  // P(S - 2 det >= t)
};

inline ConcentrationBounds concentration_bounds(double det, std::size_t n, double t) {
    if (!(det > 0.0)) throw DomainError("concentration_bounds: det must be > 0");
    if (n == 0) throw DomainError("concentration_bounds: n must be >= 1");
    if (!(t > 0.0)) throw DomainError("concentration_bounds: t must be > 0");
    const double nd = static_cast<double>(n);
    return {std::min(1.0, std::exp(-nd * t * t / (96.0 * det * det))),
            std::min(1.0, 40.0 * det * det / (nd * t * t))};
}

namespace detail {

inline TestOutcome determinant_outcome(TestId id, const PairedIncrements2D& pairs, const TestConfig2D& cfg,
                                       double n_eff) {
    if (pairs.size() == 0) throw LengthError("window-too-small: no increment pairs");
    const double mean = std::accumulate(pairs.s.begin(), pairs.s.end(), 0.0) / static_cast<double>(pairs.size());
    auto out = make_outcome(id, mean, determinant_critical(cfg.det0, n_eff, cfg.alpha), 2 * pairs.size());
    out.p_value = determinant_p_bound(mean, cfg.det0, n_eff);
    out.p_value_kind = PValueKind::UpperBound;
    return out;
}

}  // namespace detail

/// Ṡ = (2/n) Σ s_i over the n/2 pairs of a fully known drift.
inline TestOutcome test_2d_known(const PairedIncrements2D& pairs, const TestConfig2D& cfg) {
    cfg.validate();
    const double n = 2.0 * static_cast<double>(pairs.size());
    auto out = detail::determinant_outcome(TestId::Known2D, pairs, cfg, n);
    if (cfg.beta) {
        try {
            out.min_detectable = min_detectable_det(cfg, 2 * pairs.size(), Variant2D::Known);
        } catch (const LengthError& e) {
            out.warnings.emplace_back(e.what());
        }
    }
    return out;
}

/// S̃ = 2/(n - n_e - 1) Σ s̃_i over the pairs after the fit window; the
/// threshold uses n_t = n - n_e = 2·pairs + 1.
inline TestOutcome test_2d_estimated(const PairedIncrements2D& pairs, const TestConfig2D& cfg) {
    cfg.validate();
    const std::size_t n_t = 2 * pairs.size() + 1;
    auto out = detail::determinant_outcome(TestId::Estimated2D, pairs, cfg, static_cast<double>(n_t));
    if (cfg.beta) {
        try {
            out.min_detectable = min_detectable_det(cfg, n_t, Variant2D::Estimated);
        } catch (const LengthError& e) {
            out.warnings.emplace_back(e.what());
        }
    }
    return out;
}

struct MultiTestConfig {
    double alpha = 0.05;
    std::vector<double> sigma0_sq;  // per coordinate
    Variant1D variant = Variant1D::CenteredKnown;
};

struct MultiTestOutcome {
    TestOutcome outcome;
    std::vector<std::size_t> rejected_coordinates;  // 0-based
    std::vector<TestOutcome> per_coordinate;
};

/// Failure in one coordinate of the multiple test; what() names the coordinate (1-based).
class CoordinateError : public Error {
public:
    CoordinateError(std::size_t coordinate, const std::string& cause)
        : Error("coordinate " + std::to_string(coordinate + 1) + ": " + cause), coordinate_(coordinate) {}
    std::size_t coordinate() const noexcept { return coordinate_; }

private:
    std::size_t coordinate_;
};

/// Runs the 1-D centred test on every coordinate at level α/d and rejects
/// when any coordinate rejects. The global statistic is max_j S_j / c_j with
/// critical value 1 and Bonferroni p-value min(1, d·min_j p_j).
inline MultiTestOutcome multiple_test(const PathSample& path, const DriftSpec& drift, const MultiTestConfig& cfg) {
    const std::size_t d = path.dimension();
    if (cfg.sigma0_sq.size() != d)
        throw ConfigError("multiple_test: sigma0_sq has " + std::to_string(cfg.sigma0_sq.size()) +
                          " entries for a " + std::to_string(d) + "-dimensional path");
    if (drift.dimension() != d) throw ConfigError("multiple_test: drift dimension mismatch");
    if (cfg.variant != Variant1D::CenteredKnown && cfg.variant != Variant1D::CenteredEstimated)
        throw ConfigError("multiple_test supports the centred known and estimated variants");

    const bool known = cfg.variant == Variant1D::CenteredKnown;
    MultiTestOutcome result;
    double worst_ratio = 0.0;
    double min_p = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        try {
            TestConfig1D coord_cfg;
            coord_cfg.alpha = cfg.alpha / static_cast<double>(d);
            coord_cfg.sigma0_sq = cfg.sigma0_sq[j];
            const PathSample coord = coordinate_path(path, j);
            const DriftSpec coord_drift = coordinate_drift(drift, j);
            TestOutcome one;
            if (known) {
                one = test_centered_known(centered_increments_known(coord, coord_drift), coord_cfg);
            } else {
                const auto& basis = coord_drift.time_functions();
                const auto fit = fit_linear_drift(coord, basis, coord.increments());
                one = test_centered_estimated(centered_increments_estimated(coord, fit, basis[0]), coord_cfg);
            }
            worst_ratio = std::max(worst_ratio, one.statistic / one.critical_value);
            min_p = std::min(min_p, one.p_value.value_or(1.0));
            if (one.reject) result.rejected_coordinates.push_back(j);
            result.per_coordinate.push_back(std::move(one));
        } catch (const CoordinateError&) {
            throw;
        } catch (const Error& e) {
            throw CoordinateError(j, e.what());
        }
    }
    result.outcome = make_outcome(known ? TestId::MultipleKnown : TestId::MultipleEstimated, worst_ratio, 1.0,
                                  path.increments());
    result.outcome.reject = !result.rejected_coordinates.empty();
    result.outcome.p_value = std::min(1.0, static_cast<double>(d) * min_p);
    result.outcome.p_value_kind = PValueKind::UpperBound;
    return result;
}

}  // namespace sdetest
