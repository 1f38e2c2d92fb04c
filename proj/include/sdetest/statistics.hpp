#pragma once

// Increment statistics built from a discretely observed path:
//   raw        ξ_i   = (X_i - X_{i-1}) / √Δ
//   known      ξ̇_i   = ξ_i - Δ^{-1/2} ∫ b
//   estimated  ξ̂_i   = ξ_i - θ̂ Z_i,  Z_i = Δ^{-1/2} ∫ f   (ξ̂ = (I - H) ξ)
//   Euler      ξ̇_i,A = ξ_i - Δ^{1/2} b(X_{i-1})
// and the paired 2-D increments whose squared Gram determinants feed the
// determinant test.

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdetest/drift.hpp"
#include "sdetest/errors.hpp"
#include "sdetest/simulate.hpp"

namespace sdetest {

enum class IncrementKind { Raw, CenteredKnown, CenteredEstimated, CenteredEulerApprox };

struct IncrementSet1D {
    IncrementKind kind = IncrementKind::Raw;
    std::vector<double> values;
    double delta = 0.0;
    int effective_dof = 0;

    std::size_t size() const noexcept { return values.size(); }
    double sum_of_squares() const {
        return std::inner_product(values.begin(), values.end(), values.begin(), 0.0);
    }
};

struct DriftFit {
    std::vector<double> theta_hat;
    std::vector<double> theta_var;  // Δσ²/Σ(∫f)², filled when σ² is supplied
    std::size_t n_fit = 0;
    std::vector<double> design_norms;  // Σ_{i<=n_fit} (∫f)² per coordinate
    double delta = 0.0;

    double theta_variance(std::size_t coord, double sigma_sq) const {
        return delta * sigma_sq / design_norms.at(coord);
    }
};

/// Z, the rank-one projection H = Z Zᵀ / ZᵀZ and an orthonormal basis C of range(I - H).
struct ProjectionData {
    Eigen::VectorXd z;
    double trace_h = 0.0;
    Eigen::MatrixXd c;  // n × (n-1)

    Eigen::MatrixXd h() const { return z * z.transpose() / z.squaredNorm(); }
};

/// Paired increments ξ̇_{ij} ∈ ℝ² for j = 1, 2 and the determinants s_i.
struct PairedIncrements2D {
    // xi[i][j][l]: pair i, time slot j (0 or 1), coordinate l.
    std::vector<std::array<std::array<double, 2>, 2>> xi;
    std::vector<double> s;
    std::size_t first_increment = 1;  // 1-based index of the increment in xi[0][0]
    std::vector<std::array<std::array<double, 2>, 2>> leverage;  // h_{ij,l}, estimated mode only

    std::size_t size() const noexcept { return s.size(); }
};

namespace detail {

inline void require_dimension(const PathSample& path, std::size_t d, const char* op) {
    if (path.dimension() != d)
        throw ConfigError(std::string(op) + ": expected a " + std::to_string(d) + "-dimensional path, got " +
                          std::to_string(path.dimension()));
}

inline std::vector<double> basis_integrals(const TimeFunction& f, std::size_t first, std::size_t last,
                                           double delta) {
    std::vector<double> out;
    out.reserve(last - first + 1);
    for (std::size_t i = first; i <= last; ++i)
        out.push_back(integrate(f, static_cast<double>(i - 1) * delta, static_cast<double>(i) * delta));
    return out;
}

}  // namespace detail

/// Coordinate j of a path as a one-dimensional path.
inline PathSample coordinate_path(const PathSample& path, std::size_t coord) {
    if (coord >= path.dimension()) throw ConfigError("coordinate out of range");
    return PathSample(path.delta(), 1, path.column(coord));
}

/// Coordinate j of a drift as a one-dimensional drift.
inline DriftSpec coordinate_drift(const DriftSpec& drift, std::size_t coord) {
    if (coord >= drift.dimension()) throw ConfigError("coordinate out of range");
    switch (drift.kind()) {
        case DriftKind::KnownTime: return DriftSpec::known_time({drift.time_functions()[coord]});
        case DriftKind::LinearTime:
            return DriftSpec::linear_time({drift.time_functions()[coord]},
                                          drift.theta() ? std::optional<std::vector<double>>(std::vector<double>{(*drift.theta())[coord]})
                                                        : std::nullopt);
        case DriftKind::StateDependent:
            return DriftSpec::state_dependent({drift.state_functions()[coord]}, drift.approx_constant());
    }
    throw ConfigError("unknown drift kind");
}

inline IncrementSet1D raw_increments(const PathSample& path) {
    detail::require_dimension(path, 1, "raw_increments");
    const double root = std::sqrt(path.delta());
    IncrementSet1D out{IncrementKind::Raw, {}, path.delta(), static_cast<int>(path.increments())};
    out.values.resize(path.increments());
    for (std::size_t i = 1; i <= path.increments(); ++i)
        out.values[i - 1] = (path.at(i, 0) - path.at(i - 1, 0)) / root;
    return out;
}

inline IncrementSet1D centered_increments_known(const PathSample& path, const DriftSpec& drift) {
    detail::require_dimension(path, 1, "centered_increments_known");
    if (!drift.is_time_known())
        throw ConfigError("centered_increments_known needs a fully known time drift");
    IncrementSet1D out = raw_increments(path);
    out.kind = IncrementKind::CenteredKnown;
    const double root = std::sqrt(path.delta());
    for (std::size_t i = 1; i <= out.size(); ++i)
        out.values[i - 1] -= drift_integral(drift, i, path.delta())[0] / root;
    return out;
}

inline IncrementSet1D centered_increments_euler(const PathSample& path, const DriftSpec& drift) {
    detail::require_dimension(path, 1, "centered_increments_euler");
    IncrementSet1D out = raw_increments(path);
    out.kind = IncrementKind::CenteredEulerApprox;
    const double root = std::sqrt(path.delta());
    for (std::size_t i = 1; i <= out.size(); ++i)
        out.values[i - 1] -= euler_centering_term(drift, path.row(i - 1), path.delta())[0] / root;
    return out;
}

/// Least-squares θ̂_l = Σ ΔX_i ∫f / Σ (∫f)² over increments 1..n_fit, per coordinate.
inline DriftFit fit_linear_drift(const PathSample& path, std::span<const TimeFunction> basis, std::size_t n_fit,
                                 std::optional<std::vector<double>> sigma_sq = std::nullopt) {
    if (basis.size() != path.dimension()) throw ConfigError("basis count does not match path dimension");
    if (n_fit < 1 || n_fit > path.increments())
        throw LengthError("fit window " + std::to_string(n_fit) + " outside 1.." +
                          std::to_string(path.increments()));
    DriftFit fit;
    fit.n_fit = n_fit;
    fit.delta = path.delta();
    for (std::size_t l = 0; l < basis.size(); ++l) {
        const auto integrals = detail::basis_integrals(basis[l], 1, n_fit, path.delta());
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 1; i <= n_fit; ++i) {
            num += (path.at(i, l) - path.at(i - 1, l)) * integrals[i - 1];
            den += integrals[i - 1] * integrals[i - 1];
        }
        if (!(den > 0.0))
            throw ZeroDesignError("zero design: basis integrals vanish on the fit window (coordinate " +
                                  std::to_string(l + 1) + ")");
        fit.theta_hat.push_back(num / den);
        fit.design_norms.push_back(den);
    }
    if (sigma_sq) {
        if (sigma_sq->size() != basis.size()) throw ConfigError("sigma_sq length does not match basis");
        for (std::size_t l = 0; l < basis.size(); ++l)
            fit.theta_var.push_back(fit.theta_variance(l, (*sigma_sq)[l]));
    }
    return fit;
}

/// Z_i = Δ^{-1/2} ∫ f over increment i, H and C from a symmetric
/// eigendecomposition of I - H (eigenvectors with eigenvalue 1).
inline ProjectionData projection_data(const TimeFunction& basis, std::size_t n, double delta) {
    if (n < 2) throw LengthError("projection needs at least two increments");
    const auto integrals = detail::basis_integrals(basis, 1, n, delta);
    ProjectionData out;
    out.z.resize(static_cast<Eigen::Index>(n));
    const double root = std::sqrt(delta);
    for (std::size_t i = 0; i < n; ++i) out.z[static_cast<Eigen::Index>(i)] = integrals[i] / root;
    const double zz = out.z.squaredNorm();
    if (!(zz > 0.0)) throw ZeroDesignError("zero design: Z vanishes");
    const Eigen::MatrixXd h = out.h();
    out.trace_h = h.trace();
    const Eigen::MatrixXd complement = Eigen::MatrixXd::Identity(h.rows(), h.cols()) - h;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(complement);
    if (eig.info() != Eigen::Success) throw NumericFailure("eigendecomposition of I - H failed");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k)
        if (std::abs(eig.eigenvalues()[k] - 1.0) <= 1e-8) keep.push_back(k);
    if (keep.size() != n - 1)
        throw NumericFailure("I - H has " + std::to_string(keep.size()) + " unit eigenvalues, expected " +
                             std::to_string(n - 1));
    out.c.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n - 1));
    for (std::size_t k = 0; k < keep.size(); ++k) out.c.col(static_cast<Eigen::Index>(k)) = eig.eigenvectors().col(keep[k]);
    return out;
}

/// ξ̂_i = ξ_i - θ̂ Z_i with θ̂ fitted on the full sample; effective dof n - 1.
inline IncrementSet1D centered_increments_estimated(const PathSample& path, const DriftFit& fit,
                                                    const TimeFunction& basis) {
    detail::require_dimension(path, 1, "centered_increments_estimated");
    if (fit.n_fit != path.increments())
        throw ConfigError("centered_increments_estimated needs a full-sample fit (n_fit = n)");
    if (path.increments() < 2) throw LengthError("estimated centering needs at least two increments");
    IncrementSet1D out = raw_increments(path);
    out.kind = IncrementKind::CenteredEstimated;
    out.effective_dof = static_cast<int>(path.increments()) - 1;
    const double root = std::sqrt(path.delta());
    const double theta = fit.theta_hat.at(0);
    for (std::size_t i = 1; i <= out.size(); ++i) {
        const double integral =
            integrate(basis, static_cast<double>(i - 1) * path.delta(), static_cast<double>(i) * path.delta());
        out.values[i - 1] -= theta * integral / root;
    }
    return out;
}

/// Cᵀξ̂, the (n-1)-vector whose squared norm is (n-1)·S̃.
inline Eigen::VectorXd transformed_increments(const IncrementSet1D& inc, const ProjectionData& proj) {
    if (static_cast<Eigen::Index>(inc.size()) != proj.c.rows()) throw ConfigError("projection size mismatch");
    const Eigen::Map<const Eigen::VectorXd> v(inc.values.data(), static_cast<Eigen::Index>(inc.size()));
    return proj.c.transpose() * v;
}

/// Squared Gram determinant (ξ_{1,1}ξ_{2,2} - ξ_{1,2}ξ_{2,1})² of the pair [ξ_{i1} ξ_{i2}].
inline double pair_determinant(const std::array<std::array<double, 2>, 2>& pair) {
    const double det = pair[0][0] * pair[1][1] - pair[0][1] * pair[1][0];
    return det * det;
}

/// Pair increments (start, start+1), (start+2, start+3), ... of a 2-D path,
/// centred with the interval integrals of a fully known drift.
inline PairedIncrements2D paired_increments_2d(const PathSample& path, const DriftSpec& drift,
                                               std::size_t start_index = 1) {
    detail::require_dimension(path, 2, "paired_increments_2d");
    if (drift.dimension() != 2 || !drift.is_time_known())
        throw ConfigError("paired_increments_2d needs a fully known 2-D time drift");
    const std::size_t n = path.increments();
    if (start_index < 1 || start_index > n) throw LengthError("pairing window is empty");
    const std::size_t length = n - start_index + 1;
    if (length % 2 != 0)
        throw LengthError("pairing window of " + std::to_string(length) +
                          " increments is odd; drop the final observation");
    const double root = std::sqrt(path.delta());
    PairedIncrements2D out;
    out.first_increment = start_index;
    out.xi.resize(length / 2);
    out.s.resize(length / 2);
    for (std::size_t p = 0; p < length / 2; ++p) {
        for (std::size_t j = 0; j < 2; ++j) {
            const std::size_t inc = start_index + 2 * p + j;
            const auto centre = drift_integral(drift, inc, path.delta());
            for (std::size_t l = 0; l < 2; ++l)
                out.xi[p][j][l] = (path.at(inc, l) - path.at(inc - 1, l) - centre[l]) / root;
        }
        out.s[p] = pair_determinant(out.xi[p]);
    }
    return out;
}

/// Estimated-drift pairing: centre with θ̂_l ∫ f_l and report leverages
/// h_{ij,l} = (∫ f_l)² / Σ_{k<=n_e} (∫ f_l)².
inline PairedIncrements2D paired_increments_2d(const PathSample& path, const DriftFit& fit,
                                               std::span<const TimeFunction> basis, std::size_t start_index) {
    if (basis.size() != 2 || fit.theta_hat.size() != 2) throw ConfigError("2-D pairing needs two basis functions");
    const auto drift = DriftSpec::linear_time({basis.begin(), basis.end()}, fit.theta_hat);
    auto out = paired_increments_2d(path, drift, start_index);
    out.leverage.resize(out.size());
    for (std::size_t p = 0; p < out.size(); ++p)
        for (std::size_t j = 0; j < 2; ++j) {
            const std::size_t inc = start_index + 2 * p + j;
            for (std::size_t l = 0; l < 2; ++l) {
                const double integral = integrate(basis[l], static_cast<double>(inc - 1) * path.delta(),
                                                  static_cast<double>(inc) * path.delta());
                out.leverage[p][j][l] = integral * integral / fit.design_norms[l];
            }
        }
    return out;
}

struct SplitPlan {
    std::size_t n_e;          // fit window: increments 1..n_e
    std::size_t test_start;   // first test increment, n_e + 2
    std::size_t n_t;          // n - n_e
    std::optional<std::string> warning;
};

/// Split point for the estimated 2-D test. n_e defaults to n/2 and is made
/// odd by adding one, so the pair range (n_e+3)/2 .. n/2 is integral.
inline SplitPlan split_plan(std::size_t n, std::optional<std::size_t> requested = std::nullopt) {
    if (n % 2 != 0) throw LengthError("split-sample pairing needs an even number of increments");
    SplitPlan plan{requested.value_or(n / 2), 0, 0, std::nullopt};
    if (plan.n_e % 2 == 0) {
        if (requested)
            plan.warning = "n_e=" + std::to_string(plan.n_e) + " is even; using n_e=" + std::to_string(plan.n_e + 1);
        plan.n_e += 1;
    }
    if (plan.n_e < 1 || plan.n_e + 3 > n)
        throw LengthError("split window too small: n=" + std::to_string(n) + ", n_e=" + std::to_string(plan.n_e));
    plan.test_start = plan.n_e + 2;
    plan.n_t = n - plan.n_e;
    return plan;
}

}  // namespace sdetest
