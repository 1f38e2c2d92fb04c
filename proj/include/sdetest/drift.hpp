#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdetest/errors.hpp"

namespace sdetest {

using ScalarFn = std::function<double(double)>;

/// A function of time with an optional antiderivative. When the
/// antiderivative is present, interval integrals use it in closed form.
struct TimeFunction {
    ScalarFn value;
    ScalarFn antiderivative;

    static TimeFunction constant(double c) {
        return {[c](double) { return c; }, [c](double t) { return c * t; }};
    }
    static TimeFunction sine(double scale = 1.0) {
        return {[scale](double t) { return scale * std::sin(t); },
                [scale](double t) { return -scale * std::cos(t); }};
    }
    static TimeFunction cosine(double scale = 1.0) {
        return {[scale](double t) { return scale * std::cos(t); },
                [scale](double t) { return scale * std::sin(t); }};
    }
};

namespace detail {

inline double simpson_rule(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const ScalarFn& f, double a, double fa, double b, double fb, double m,
                               double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_rule(a, fa, m, fm, flm);
    const double right = simpson_rule(m, fm, b, fb, frm);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive composite Simpson quadrature of f over [a, b] to absolute tolerance tol.
inline double integrate_simpson(const ScalarFn& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = detail::simpson_rule(a, fa, b, fb, fm);
    return detail::adaptive_simpson(f, a, fa, b, fb, m, fm, whole, tol, 50);
}

/// ∫_a^b f; closed form when an antiderivative is supplied.
inline double integrate(const TimeFunction& fn, double a, double b) {
    if (fn.antiderivative) return fn.antiderivative(b) - fn.antiderivative(a);
    return integrate_simpson(fn.value, a, b, 1e-12 * std::abs(b - a));
}

enum class DriftKind { KnownTime, LinearTime, StateDependent };

inline const char* to_string(DriftKind kind) {
    switch (kind) {
        case DriftKind::KnownTime: return "known-time";
        case DriftKind::LinearTime: return "linear-time";
        case DriftKind::StateDependent: return "state-dependent";
    }
    return "?";
}

/// Drift b of dX = b dt + Σ dW, one entry per coordinate.
///
/// KnownTime:      b_j(t) given directly.
/// LinearTime:     b_j(t) = θ_j f_j(t); θ may be absent when only the basis is known.
/// StateDependent: b_j(x_j), with approximation constant K >= 0 for the
///                 Euler centering error.
class DriftSpec {
public:
    static DriftSpec known_time(std::vector<TimeFunction> b) {
        DriftSpec s(DriftKind::KnownTime);
        s.time_fns_ = std::move(b);
        s.validate();
        return s;
    }

    static DriftSpec linear_time(std::vector<TimeFunction> basis, std::optional<std::vector<double>> theta) {
        DriftSpec s(DriftKind::LinearTime);
        s.time_fns_ = std::move(basis);
        s.theta_ = std::move(theta);
        s.validate();
        return s;
    }

    static DriftSpec state_dependent(std::vector<ScalarFn> b, double approx_constant) {
        DriftSpec s(DriftKind::StateDependent);
        s.state_fns_ = std::move(b);
        s.approx_constant_ = approx_constant;
        s.validate();
        return s;
    }

    static DriftSpec zero(std::size_t dimension) {
        return known_time(std::vector<TimeFunction>(dimension, TimeFunction::constant(0.0)));
    }

    DriftKind kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept {
        return kind_ == DriftKind::StateDependent ? state_fns_.size() : time_fns_.size();
    }
    /// Time functions: b_j for KnownTime, the basis f_j for LinearTime.
    const std::vector<TimeFunction>& time_functions() const noexcept { return time_fns_; }
    const std::vector<ScalarFn>& state_functions() const noexcept { return state_fns_; }
    const std::optional<std::vector<double>>& theta() const noexcept { return theta_; }
    double approx_constant() const noexcept { return approx_constant_; }

    /// True when interval integrals of b are computable without data.
    bool is_time_known() const noexcept {
        return kind_ == DriftKind::KnownTime || (kind_ == DriftKind::LinearTime && theta_.has_value());
    }

    /// Drift rate b_j at time t and state x_j.
    double rate(std::size_t coord, double t, double x) const {
        switch (kind_) {
            case DriftKind::KnownTime: return time_fns_[coord].value(t);
            case DriftKind::LinearTime:
                if (!theta_) throw ConfigError("linear drift rate needs theta");
                return (*theta_)[coord] * time_fns_[coord].value(t);
            case DriftKind::StateDependent: return state_fns_[coord](x);
        }
        return 0.0;
    }

    /// The same drift with θ replaced (LinearTime only).
    DriftSpec with_theta(std::vector<double> theta) const {
        if (kind_ != DriftKind::LinearTime) throw ConfigError("with_theta requires a linear drift");
        return linear_time(time_fns_, std::move(theta));
    }

private:
    explicit DriftSpec(DriftKind kind) : kind_(kind) {}

    void validate() const {
        if (dimension() == 0) throw ConfigError("drift needs at least one coordinate");
        if (kind_ != DriftKind::StateDependent) {
            for (const auto& f : time_fns_)
                if (!f.value) throw ConfigError("drift time function is empty");
        } else {
            for (const auto& f : state_fns_)
                if (!f) throw ConfigError("drift state function is empty");
        }
        if (theta_ && theta_->size() != time_fns_.size())
            throw ConfigError("theta length " + std::to_string(theta_->size()) +
                              " does not match drift dimension " + std::to_string(time_fns_.size()));
        if (!(approx_constant_ >= 0.0)) throw ConfigError("approximation constant K must be >= 0");
    }

    DriftKind kind_;
    std::vector<TimeFunction> time_fns_;
    std::vector<ScalarFn> state_fns_;
    std::optional<std::vector<double>> theta_;
    double approx_constant_ = 0.0;
};

}  // namespace sdetest
