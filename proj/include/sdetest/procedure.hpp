#pragma once

// A test bound to a drift model and a sampling design. Critical values are
// computed once at construction; `run` evaluates a path, `rejects` is the
// allocation-light decision used by the Monte-Carlo harness.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sdetest/drift.hpp"
#include "sdetest/errors.hpp"
#include "sdetest/outcome.hpp"
#include "sdetest/simulate.hpp"
#include "sdetest/statistics.hpp"
#include "sdetest/tests_1d.hpp"
#include "sdetest/tests_2d.hpp"

namespace sdetest {

struct TestParams {
    double alpha = 0.05;
    std::vector<double> sigma0_sq;  // one entry per coordinate
    std::optional<double> beta;
    std::optional<double> eta;
    std::optional<double> approx_constant;  // K
    std::optional<std::size_t> n_e;
};

class Procedure {
public:
    /// `model` is the drift as known to the tester: fully known drifts centre
    /// directly, estimated variants only use its basis. `n` is the number of
    /// increments of the paths to be tested.
    Procedure(TestId id, DriftSpec model, TestParams params, std::size_t n, double delta)
        : id_(id), model_(std::move(model)), params_(std::move(params)), n_(n), delta_(delta) {
        const std::size_t d = model_.dimension();
        if (params_.sigma0_sq.size() != d)
            throw ConfigError(std::string(to_string(id_)) + ": sigma0_sq needs " + std::to_string(d) +
                              " value(s), got " + std::to_string(params_.sigma0_sq.size()));
        if (is_multiple()) {
            if (d < 2) throw ConfigError(std::string(to_string(id_)) + " needs a path with d >= 2");
        } else if (test_dimension(id_) != d) {
            throw ConfigError(std::string(to_string(id_)) + " needs a " + std::to_string(test_dimension(id_)) +
                              "-dimensional model, got d=" + std::to_string(d));
        }
        if (n_ < 2) throw LengthError("need at least two increments");
        prepare();
    }

    TestId id() const noexcept { return id_; }
    double critical_value() const noexcept { return critical_; }
    std::size_t increments() const noexcept { return n_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Full outcome with p-value and warnings.
    TestOutcome run(const PathSample& path) const {
        check_path(path);
        TestOutcome out;
        switch (id_) {
            case TestId::Noncentered1D:
                out = test_noncentered(raw_increments(path), model_, config_1d());
                break;
            case TestId::CenteredKnown1D:
                out = test_centered_known(centered_increments_known(path, model_), config_1d());
                break;
            case TestId::CenteredEstimated1D: {
                const auto& basis = model_.time_functions();
                const auto fit = fit_linear_drift(path, basis, path.increments());
                out = test_centered_estimated(centered_increments_estimated(path, fit, basis[0]), config_1d());
                break;
            }
            case TestId::StateDependent1D:
                out = test_state_dependent(centered_increments_euler(path, model_), config_1d());
                break;
            case TestId::Known2D:
                out = test_2d_known(paired_increments_2d(even_path(path), model_), config_2d());
                break;
            case TestId::Estimated2D: {
                const PathSample even = even_path(path);
                const auto& basis = model_.time_functions();
                const auto fit = fit_linear_drift(even, basis, plan_->n_e);
                out = test_2d_estimated(paired_increments_2d(even, fit, basis, plan_->test_start), config_2d());
                break;
            }
            case TestId::MultipleKnown:
            case TestId::MultipleEstimated: {
                MultiTestConfig cfg{params_.alpha, params_.sigma0_sq,
                                    id_ == TestId::MultipleKnown ? Variant1D::CenteredKnown
                                                                 : Variant1D::CenteredEstimated};
                out = multiple_test(path, model_, cfg).outcome;
                break;
            }
        }
        out.warnings.insert(out.warnings.begin(), warnings_.begin(), warnings_.end());
        return out;
    }

    /// Decision only, against the cached critical value.
    bool rejects(const PathSample& path) const {
        check_path(path);
        const double root = std::sqrt(delta_);
        switch (id_) {
            case TestId::Noncentered1D:
            case TestId::CenteredKnown1D: {
                const auto& centre = centre_[0];
                double sum = 0.0;
                for (std::size_t i = 1; i <= n_; ++i) {
                    const double xi = (path.at(i, 0) - path.at(i - 1, 0)) / root - centre[i - 1];
                    sum += xi * xi;
                }
                return sum / static_cast<double>(n_) >= critical_;
            }
            case TestId::CenteredEstimated1D:
                return estimated_sum_of_squares(path, 0) / static_cast<double>(n_ - 1) >= critical_;
            case TestId::StateDependent1D: {
                const auto& b = model_.state_functions()[0];
                double sum = 0.0;
                for (std::size_t i = 1; i <= n_; ++i) {
                    const double x = path.at(i - 1, 0);
                    const double xi = (path.at(i, 0) - x - delta_ * b(x)) / root;
                    sum += xi * xi;
                }
                return sum / static_cast<double>(n_) >= critical_;
            }
            case TestId::Known2D:
            case TestId::Estimated2D: return determinant_mean(path) >= critical_;
            case TestId::MultipleKnown:
                for (std::size_t j = 0; j < model_.dimension(); ++j) {
                    double sum = 0.0;
                    for (std::size_t i = 1; i <= n_; ++i) {
                        const double xi = (path.at(i, j) - path.at(i - 1, j)) / root - centre_[j][i - 1];
                        sum += xi * xi;
                    }
                    if (sum / static_cast<double>(n_) >= coord_critical_[j]) return true;
                }
                return false;
            case TestId::MultipleEstimated:
                for (std::size_t j = 0; j < model_.dimension(); ++j)
                    if (estimated_sum_of_squares(path, j) / static_cast<double>(n_ - 1) >= coord_critical_[j])
                        return true;
                return false;
        }
        return false;
    }

private:
    bool is_multiple() const noexcept { return id_ == TestId::MultipleKnown || id_ == TestId::MultipleEstimated; }
    bool is_2d() const noexcept { return id_ == TestId::Known2D || id_ == TestId::Estimated2D; }

    bool needs_known_drift() const noexcept {
        return id_ == TestId::Noncentered1D || id_ == TestId::CenteredKnown1D || id_ == TestId::Known2D ||
               id_ == TestId::MultipleKnown;
    }

    TestConfig1D config_1d() const {
        return {params_.alpha, params_.sigma0_sq[0], params_.beta, params_.eta, params_.approx_constant};
    }

    TestConfig2D config_2d() const {
        return {params_.alpha, params_.sigma0_sq[0] * params_.sigma0_sq[1], params_.beta, params_.n_e};
    }

    void prepare() {
        if (needs_known_drift() && !model_.is_time_known())
            throw ConfigError(std::string(to_string(id_)) + " needs a fully known time drift (model with theta)");
        if ((id_ == TestId::CenteredEstimated1D || id_ == TestId::Estimated2D || id_ == TestId::MultipleEstimated) &&
            model_.kind() == DriftKind::StateDependent)
            throw ConfigError(std::string(to_string(id_)) + " needs a linear time drift basis");
        if (id_ == TestId::StateDependent1D && model_.kind() != DriftKind::StateDependent)
            throw ConfigError("1d-state-dependent needs a state-dependent drift model");

        const std::size_t d = model_.dimension();
        const double root = std::sqrt(delta_);
        if (model_.kind() != DriftKind::StateDependent) {
            // Δ^{-1/2} ∫ over each increment: of b for known drifts, of the basis otherwise.
            centre_.assign(d, std::vector<double>(n_));
            for (std::size_t i = 1; i <= n_; ++i) {
                const double a = static_cast<double>(i - 1) * delta_;
                const double b = static_cast<double>(i) * delta_;
                for (std::size_t j = 0; j < d; ++j) {
                    double integral = integrate(model_.time_functions()[j], a, b);
                    if (needs_known_drift() && model_.kind() == DriftKind::LinearTime)
                        integral *= (*model_.theta())[j];
                    centre_[j][i - 1] = integral / root;
                }
            }
        }

        switch (id_) {
            case TestId::Noncentered1D: {
                const TestConfig1D cfg = config_1d();
                cfg.validate();
                const double lambda0 = noncentrality(model_, n_, delta_, cfg.sigma0_sq);
                critical_ = chisq_critical(cfg.sigma0_sq, static_cast<int>(n_), lambda0, cfg.alpha);
                centre_[0].assign(n_, 0.0);
                break;
            }
            case TestId::CenteredKnown1D:
                config_1d().validate();
                critical_ = chisq_critical(params_.sigma0_sq[0], static_cast<int>(n_), 0.0, params_.alpha);
                break;
            case TestId::CenteredEstimated1D:
                config_1d().validate();
                critical_ = chisq_critical(params_.sigma0_sq[0], static_cast<int>(n_) - 1, 0.0, params_.alpha);
                break;
            case TestId::StateDependent1D: {
                const TestConfig1D cfg = config_1d();
                cfg.validate();
                critical_ = state_dependent_critical(cfg, static_cast<int>(n_), delta_);
                break;
            }
            case TestId::Known2D:
            case TestId::Estimated2D: {
                const TestConfig2D cfg = config_2d();
                cfg.validate();
                if (n_ % 2 != 0) {
                    warnings_.push_back("odd number of increments (" + std::to_string(n_) +
                                        "); the final observation is dropped");
                    n_ -= 1;
                }
                if (id_ == TestId::Known2D) {
                    critical_ = determinant_critical(cfg.det0, static_cast<double>(n_), cfg.alpha);
                    if (cfg.beta && static_cast<double>(n_) <= 24.0 * -std::log(*cfg.beta))
                        warnings_.push_back("n=" + std::to_string(n_) + " <= 24 log(1/beta): power is not guaranteed");
                } else {
                    plan_ = split_plan(n_, params_.n_e);
                    if (plan_->warning) warnings_.push_back(*plan_->warning);
                    critical_ = determinant_critical(cfg.det0, static_cast<double>(plan_->n_t), cfg.alpha);
                    if (cfg.beta && static_cast<double>(plan_->n_t) <= 48.0 * -std::log(*cfg.beta))
                        warnings_.push_back("n_t=" + std::to_string(plan_->n_t) +
                                            " <= 48 log(1/beta): power is not guaranteed");
                }
                break;
            }
            case TestId::MultipleKnown:
            case TestId::MultipleEstimated: {
                const bool known = id_ == TestId::MultipleKnown;
                const int dof = static_cast<int>(n_) - (known ? 0 : 1);
                const double level = params_.alpha / static_cast<double>(d);
                for (std::size_t j = 0; j < d; ++j) {
                    TestConfig1D cfg;
                    cfg.alpha = level;
                    cfg.sigma0_sq = params_.sigma0_sq[j];
                    cfg.validate();
                    coord_critical_.push_back(chisq_critical(cfg.sigma0_sq, dof, 0.0, level));
                }
                critical_ = 1.0;
                break;
            }
        }
    }

    void check_path(const PathSample& path) const {
        if (path.dimension() != model_.dimension())
            throw ConfigError(std::string(to_string(id_)) + " needs d=" + std::to_string(model_.dimension()) +
                              " input, got d=" + std::to_string(path.dimension()));
        const std::size_t expected = is_2d() ? path.increments() - path.increments() % 2 : path.increments();
        if (expected != n_)
            throw LengthError("path has " + std::to_string(path.increments()) + " increments, procedure prepared for " +
                              std::to_string(n_));
        if (std::abs(path.delta() - delta_) > 1e-12 * delta_)
            throw ConfigError("path step differs from the prepared design");
    }

    PathSample even_path(const PathSample& path) const {
        return path.increments() == n_ ? path : path.truncated(n_);
    }

    /// |ξ̂|² for coordinate j, θ̂ fitted on all n increments.
    double estimated_sum_of_squares(const PathSample& path, std::size_t j) const {
        const double root = std::sqrt(delta_);
        const auto& z = centre_[j];
        double zx = 0.0;
        double zz = 0.0;
        for (std::size_t i = 1; i <= n_; ++i) {
            const double xi = (path.at(i, j) - path.at(i - 1, j)) / root;
            zx += z[i - 1] * xi;
            zz += z[i - 1] * z[i - 1];
        }
        if (!(zz > 0.0)) throw ZeroDesignError("zero design: basis integrals vanish");
        const double theta = zx / zz;
        double sum = 0.0;
        for (std::size_t i = 1; i <= n_; ++i) {
            const double r = (path.at(i, j) - path.at(i - 1, j)) / root - theta * z[i - 1];
            sum += r * r;
        }
        return sum;
    }

    double determinant_mean(const PathSample& path) const {
        const double root = std::sqrt(delta_);
        std::size_t first = 1;
        double theta[2] = {1.0, 1.0};
        if (id_ == TestId::Estimated2D) {
            first = plan_->test_start;
            for (std::size_t l = 0; l < 2; ++l) {
                double zx = 0.0;
                double zz = 0.0;
                for (std::size_t i = 1; i <= plan_->n_e; ++i) {
                    zx += centre_[l][i - 1] * (path.at(i, l) - path.at(i - 1, l)) / root;
                    zz += centre_[l][i - 1] * centre_[l][i - 1];
                }
                if (!(zz > 0.0)) throw ZeroDesignError("zero design: basis integrals vanish on the fit window");
                theta[l] = zx / zz;
            }
        }
        const std::size_t pairs = (n_ - first + 1) / 2;
        double sum = 0.0;
        for (std::size_t p = 0; p < pairs; ++p) {
            std::array<std::array<double, 2>, 2> xi{};
            for (std::size_t k = 0; k < 2; ++k) {
                const std::size_t inc = first + 2 * p + k;
                for (std::size_t l = 0; l < 2; ++l)
                    xi[k][l] = (path.at(inc, l) - path.at(inc - 1, l)) / root - theta[l] * centre_[l][inc - 1];
            }
            sum += pair_determinant(xi);
        }
        return sum / static_cast<double>(pairs);
    }

    TestId id_;
    DriftSpec model_;
    TestParams params_;
    std::size_t n_;
    double delta_;
    double critical_ = 0.0;
    std::vector<double> coord_critical_;
    std::vector<std::vector<double>> centre_;
    std::optional<SplitPlan> plan_;
    std::vector<std::string> warnings_;
};

}  // namespace sdetest
