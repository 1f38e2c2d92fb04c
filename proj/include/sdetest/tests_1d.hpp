#pragma once

// One-dimensional tests of H0: σ² = σ0² against H1: σ² > σ0².
//
//   noncentered        S   = |ξ|²/n,       n S/σ0² ~ χ²_n(λ(σ0)),  λ(σ) = Σ(∫b)²/(σ²Δ)
//   centered, known    Ṡ   = |ξ̇|²/n,       n Ṡ/σ0² ~ χ²_n
//   centered, fitted   S̃   = |Cᵀξ̂|²/(n-1), (n-1) S̃/σ0² ~ χ²_{n-1}
//   Euler-centered     Ṡ_A = |ξ̇_A|²/n,     conservative threshold (1+η)ż + ((η+1)/η)ΔK²

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "sdetest/drift.hpp"
#include "sdetest/errors.hpp"
#include "sdetest/outcome.hpp"
#include "sdetest/simulate.hpp"
#include "sdetest/specfun.hpp"
#include "sdetest/statistics.hpp"

namespace sdetest {

struct TestConfig1D {
    double alpha = 0.05;
    double sigma0_sq = 1.0;
    std::optional<double> beta;
    std::optional<double> eta;
    std::optional<double> approx_constant;  // K

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
        if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) throw ConfigError("sigma0_sq must be > 0");
        if (beta) {
            if (!(*beta > 0.0 && *beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
            if (1.0 - *beta < alpha) throw ConfigError("need 1 - beta >= alpha");
        }
        if (eta && !(*eta > 0.0 && *eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
        if (approx_constant && !(*approx_constant >= 0.0)) throw ConfigError("K must be >= 0");
    }
};

enum class Variant1D { Noncentered, CenteredKnown, CenteredEstimated, StateDependent };

/// Σ_{i<=n} (∫_{(i-1)Δ}^{iΔ} b)² / Δ, so that λ(σ) = drift_energy / σ².
inline double drift_energy(const DriftSpec& drift, std::size_t n, double delta) {
    if (drift.dimension() != 1) throw ConfigError("drift_energy expects a one-dimensional drift");
    double sum = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double m = drift_integral(drift, i, delta)[0];
        sum += m * m;
    }
    return sum / delta;
}

/// λ(σ) = Σ(∫b)²/(σ²Δ).
inline double noncentrality(const DriftSpec& drift, std::size_t n, double delta, double sigma_sq) {
    return drift_energy(drift, n, delta) / sigma_sq;
}

/// (σ0²/dof) q_{χ²_dof(λ0), 1-α}.
inline double chisq_critical(double sigma0_sq, int dof, double lambda0, double alpha) {
    return sigma0_sq / dof * chisq_quantile(NoncentralChiSq(dof, lambda0), 1.0 - alpha);
}

/// (1+η) ż_{1-α} + ((η+1)/η) Δ K².
inline double state_dependent_critical(const TestConfig1D& cfg, int n, double delta) {
    if (!cfg.eta || !cfg.approx_constant)
        throw ConfigError("the state-dependent test needs both eta and K");
    const double eta = *cfg.eta;
    const double k = *cfg.approx_constant;
    return (1.0 + eta) * chisq_critical(cfg.sigma0_sq, n, 0.0, cfg.alpha) + (eta + 1.0) / eta * delta * k * k;
}

namespace detail {

inline void require_kind(const IncrementSet1D& inc, IncrementKind kind, const char* op) {
    if (inc.kind != kind) throw ConfigError(std::string(op) + ": increments of the wrong kind");
    if (inc.size() < 1) throw LengthError(std::string(op) + ": no increments");
}

inline TestOutcome chisq_outcome(TestId id, double statistic, double critical, int dof, double lambda0,
                                 const TestConfig1D& cfg, std::size_t n_used) {
    auto out = make_outcome(id, statistic, critical, n_used);
    out.p_value = 1.0 - chisq_cdf(NoncentralChiSq(dof, lambda0), dof * statistic / cfg.sigma0_sq);
    out.p_value_kind = PValueKind::Exact;
    return out;
}

}  // namespace detail

inline TestOutcome test_noncentered(const IncrementSet1D& inc, const DriftSpec& drift, const TestConfig1D& cfg) {
    cfg.validate();
    detail::require_kind(inc, IncrementKind::Raw, "test_noncentered");
    const int n = static_cast<int>(inc.size());
    const double lambda0 = noncentrality(drift, inc.size(), inc.delta, cfg.sigma0_sq);
    const double statistic = inc.sum_of_squares() / n;
    return detail::chisq_outcome(TestId::Noncentered1D, statistic, chisq_critical(cfg.sigma0_sq, n, lambda0, cfg.alpha),
                                 n, lambda0, cfg, inc.size());
}

inline TestOutcome test_centered_known(const IncrementSet1D& inc, const TestConfig1D& cfg) {
    cfg.validate();
    detail::require_kind(inc, IncrementKind::CenteredKnown, "test_centered_known");
    const int n = static_cast<int>(inc.size());
    const double statistic = inc.sum_of_squares() / n;
    return detail::chisq_outcome(TestId::CenteredKnown1D, statistic, chisq_critical(cfg.sigma0_sq, n, 0.0, cfg.alpha),
                                 n, 0.0, cfg, inc.size());
}

/// Uses |Cᵀξ̂|² = |ξ̂|², valid because ξ̂ lies in range(I - H).
inline TestOutcome test_centered_estimated(const IncrementSet1D& inc, const TestConfig1D& cfg) {
    cfg.validate();
    detail::require_kind(inc, IncrementKind::CenteredEstimated, "test_centered_estimated");
    const int dof = inc.effective_dof;
    if (dof != static_cast<int>(inc.size()) - 1 || dof < 1)
        throw ConfigError("estimated increments must carry n - 1 degrees of freedom");
    const double statistic = inc.sum_of_squares() / dof;
    return detail::chisq_outcome(TestId::CenteredEstimated1D, statistic,
                                 chisq_critical(cfg.sigma0_sq, dof, 0.0, cfg.alpha), dof, 0.0, cfg, inc.size());
}

/// Level <= α only; no p-value is reported.
inline TestOutcome test_state_dependent(const IncrementSet1D& inc, const TestConfig1D& cfg) {
    cfg.validate();
    detail::require_kind(inc, IncrementKind::CenteredEulerApprox, "test_state_dependent");
    const int n = static_cast<int>(inc.size());
    return make_outcome(TestId::StateDependent1D, inc.sum_of_squares() / n,
                        state_dependent_critical(cfg, n, inc.delta), inc.size());
}

/// Smallest σ² for which the Type II error is <= β.
///
/// Centered variants use the closed-form quantile ratio. The noncentered
/// condition σ² = σ0² q_{χ²_n(λ(σ0)),1-α} / q_{χ²_n(λ(σ)),β} depends on σ
/// through λ(σ) = energy/σ² and is solved by fixed-point iteration; the
/// right-hand side is increasing in σ², so iterates from σ0² rise
/// monotonically to the smallest root.
inline double min_detectable_sigma_1d(const TestConfig1D& cfg, std::size_t n, Variant1D variant,
                                      double drift_energy_value = 0.0, double delta = 0.0) {
    cfg.validate();
    if (!cfg.beta) throw ConfigError("min_detectable_sigma_1d needs beta");
    const double beta = *cfg.beta;
    const int dof = static_cast<int>(n);
    switch (variant) {
        case Variant1D::CenteredKnown:
            return cfg.sigma0_sq * chisq_quantile(NoncentralChiSq::central(dof), 1.0 - cfg.alpha) /
                   chisq_quantile(NoncentralChiSq::central(dof), beta);
        case Variant1D::CenteredEstimated:
            return cfg.sigma0_sq * chisq_quantile(NoncentralChiSq::central(dof - 1), 1.0 - cfg.alpha) /
                   chisq_quantile(NoncentralChiSq::central(dof - 1), beta);
        case Variant1D::StateDependent: {
            if (!cfg.eta || !cfg.approx_constant) throw ConfigError("state-dependent variant needs eta and K");
            const double eta = *cfg.eta;
            const double k = *cfg.approx_constant;
            const double q_hi = chisq_quantile(NoncentralChiSq::central(dof), 1.0 - cfg.alpha);
            const double q_beta = chisq_quantile(NoncentralChiSq::central(dof), beta);
            return (1.0 + eta) / (1.0 - eta) * q_hi / q_beta * cfg.sigma0_sq +
                   2.0 / (eta * (1.0 - eta)) * static_cast<double>(n) * delta * k * k / q_beta;
        }
        case Variant1D::Noncentered: {
            const double lambda0 = drift_energy_value / cfg.sigma0_sq;
            const double numerator = cfg.sigma0_sq * chisq_quantile(NoncentralChiSq(dof, lambda0), 1.0 - cfg.alpha);
            double sigma_sq = cfg.sigma0_sq;
            for (int iter = 0; iter < 200; ++iter) {
                const double next =
                    numerator / chisq_quantile(NoncentralChiSq(dof, drift_energy_value / sigma_sq), beta);
                if (std::abs(next - sigma_sq) <= 1e-8 * std::abs(next)) return next;
                sigma_sq = next;
            }
            throw NumericFailure("noncentered separability iteration did not converge in 200 steps");
        }
    }
    throw ConfigError("unknown variant");
}

}  // namespace sdetest
