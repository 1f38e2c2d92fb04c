#pragma once

// Special functions for the chi-squared family: modified Bessel I_k, the
// Marcum Q function, central/noncentral chi-squared CDF and quantiles, the
// standard normal quantile and closed-form quantile bounds.
//
// The noncentral law is evaluated as a Poisson mixture of central terms,
//   P(chi2_n(lambda) <= x) = sum_j Pois(j; lambda/2) * P(n/2 + j, x/2),
// summed outward from the Poisson mode with the three-term gamma recurrences,
// so a single incomplete-gamma evaluation is needed per call.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sdetest/errors.hpp"

namespace sdetest {

inline constexpr int kMaxBesselOrder = 10000;

/// Distribution chi2_n(lambda). lambda == 0 is the central law.
struct NoncentralChiSq {
    int dof = 1;
    double noncentrality = 0.0;

    NoncentralChiSq() = default;
    NoncentralChiSq(int n, double lambda) : dof(n), noncentrality(lambda) {
        if (n < 1) throw DomainError("chi-squared dof must be >= 1, got " + std::to_string(n));
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw DomainError("noncentrality must be finite and >= 0");
    }
    static NoncentralChiSq central(int n) { return {n, 0.0}; }

    double mean() const { return dof + noncentrality; }
    double variance() const { return 2.0 * (dof + 2.0 * noncentrality); }
};

struct QuantileBounds {
    double lower;
    double upper;
};

struct GammaRatios {
    double p;  // regularized lower incomplete gamma P(a, x)
    double q;  // regularized upper incomplete gamma Q(a, x) = 1 - P
};

namespace detail {

inline constexpr int kMaxIterations = 100000;
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Power series for P(a, x); converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int k = 0; k < kMaxIterations; ++k) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps * 0.5) {
            return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
        }
    }
    throw NumericFailure("incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for Q(a, x); used for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            return std::exp(a * std::log(x) - x - std::lgamma(a)) * h;
        }
    }
    throw NumericFailure("incomplete gamma continued fraction did not converge");
}

struct MixtureResult {
    double q;        // sum_j w_j Q(a + j, y)
    double density;  // sum_j w_j g(y; a + j), gamma density in y
};

// Poisson(mu) mixture over shapes a + j of the gamma upper tail at y.
// Q(a+j+1, y) = Q(a+j, y) + g(y; a+j+1) and g(y; a+j+1) = g(y; a+j) * y / (a+j).
inline MixtureResult gamma_poisson_mixture(double a, double mu, double y) {
    constexpr double weight_floor = 1e-17;
    const auto gamma_density = [](double shape, double at) {
        return std::exp((shape - 1.0) * std::log(at) - at - std::lgamma(shape));
    };

    const long mode = mu > 0.0 ? static_cast<long>(std::floor(mu)) : 0;
    const double shape0 = a + static_cast<double>(mode);
    const double w0 = mu > 0.0 ? std::exp(-mu + mode * std::log(mu) - std::lgamma(mode + 1.0))
                               : 1.0;
    double q0;
    if (y < shape0 + 1.0) {
        q0 = 1.0 - gamma_p_series(shape0, y);
    } else {
        q0 = gamma_q_continued_fraction(shape0, y);
    }
    const double g0 = gamma_density(shape0, y);

    double q_sum = w0 * q0;
    double d_sum = w0 * g0;
    if (mu == 0.0) return {q0, g0};

    // Forward: j = mode+1, mode+2, ...
    {
        double w = w0;
        double g = g0;
        double q = q0;
        for (long j = mode; j < mode + kMaxIterations; ++j) {
            const double shape = a + static_cast<double>(j);
            w *= mu / static_cast<double>(j + 1);
            g *= y / shape;
            q += g;
            q_sum += w * std::min(q, 1.0);
            d_sum += w * g;
            if (w < weight_floor && static_cast<double>(j) > mu) break;
        }
    }
    // Backward: j = mode-1, ..., 0
    {
        double w = w0;
        double g = g0;
        double q = q0;
        for (long j = mode; j > 0; --j) {
            const double shape = a + static_cast<double>(j);
            // Q(shape - 1) = Q(shape) - g(shape)
            q -= g;
            w *= static_cast<double>(j) / mu;
            g *= (shape - 1.0) / y;
            q_sum += w * std::max(q, 0.0);
            d_sum += w * g;
            if (w < weight_floor) break;
        }
    }
    return {std::clamp(q_sum, 0.0, 1.0), d_sum};
}

}  // namespace detail

/// Regularized incomplete gamma pair (P, Q) for a > 0, x >= 0.
inline GammaRatios regularized_gamma(double a, double x) {
    if (!(a > 0.0)) throw DomainError("incomplete gamma requires a > 0");
    if (!(x >= 0.0)) throw DomainError("incomplete gamma requires x >= 0");
    if (x == 0.0) return {0.0, 1.0};
    if (std::isinf(x)) return {1.0, 0.0};
    if (x < a + 1.0) {
        const double p = detail::gamma_p_series(a, x);
        return {p, 1.0 - p};
    }
    const double q = detail::gamma_q_continued_fraction(a, x);
    return {1.0 - q, q};
}

namespace detail {

// I_k(x) * exp(-shift) by the ascending series sum_m (x/2)^{2m+k} / (m! (m+k)!).
// Terms are kept relative to the first one and rescaled before overflow.
inline double bessel_i_series(int k, double x, double shift) {
    const double half = 0.5 * x;
    const double quarter_sq = half * half;
    double log_scale = k * std::log(half) - std::lgamma(k + 1.0) - shift;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < kMaxIterations; ++m) {
        term *= quarter_sq / (static_cast<double>(m) * (m + k));
        sum += term;
        if (sum > 1e280) {
            sum *= 1e-280;
            term *= 1e-280;
            log_scale += 280.0 * std::numbers::ln10;
        }
        if (term < sum * kEps * 0.25 && m > half) return sum * std::exp(log_scale);
    }
    throw NumericFailure("Bessel I series did not converge");
}

inline int checked_bessel_order(int order, double x) {
    const int k = std::abs(order);
    if (k > kMaxBesselOrder) throw DomainError("Bessel order exceeds configured maximum");
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("bessel_i requires finite x >= 0");
    return k;
}

}  // namespace detail

/// exp(-x) * I_k(x) for integer k. Valid for any finite x >= 0.
inline double bessel_i_scaled(int order, double x) {
    const int k = detail::checked_bessel_order(order, x);
    if (x == 0.0) return k == 0 ? 1.0 : 0.0;

    // Hankel asymptotic expansion once x dominates the order.
    if (x > 1000.0 && static_cast<double>(k) * k < x / 10.0) {
        const double mu = 4.0 * static_cast<double>(k) * k;
        double term = 1.0;
        double sum = 1.0;
        for (int j = 1; j < 60; ++j) {
            const double next = -term * (mu - (2.0 * j - 1) * (2.0 * j - 1)) / (j * 8.0 * x);
            if (std::abs(next) >= std::abs(term)) break;
            term = next;
            sum += term;
            if (std::abs(term) < detail::kEps * std::abs(sum)) break;
        }
        return sum / std::sqrt(2.0 * std::numbers::pi * x);
    }
    return detail::bessel_i_series(k, x, x);
}

/// Modified Bessel function of the first kind I_k(x) for integer k,
/// I_{-k} = I_k. Throws OverflowError where I_k(x) exceeds double range;
/// bessel_i_scaled covers that region.
inline double bessel_i(int order, double x) {
    const int k = detail::checked_bessel_order(order, x);
    if (x == 0.0) return k == 0 ? 1.0 : 0.0;
    if (x <= 700.0) return detail::bessel_i_series(k, x, 0.0);
    const double log_value = std::log(bessel_i_scaled(k, x)) + x;
    if (log_value >= std::log(std::numeric_limits<double>::max()))
        throw OverflowError("bessel_i(" + std::to_string(order) + ", " + std::to_string(x) +
                            ") overflows; use bessel_i_scaled");
    return std::exp(log_value);
}

/// Marcum Q_m(u, v) = P(chi2_{2m}(u^2) > v^2), m >= 1/2.
inline double marcum_q(double m, double u, double v) {
    if (!(m >= 0.5)) throw DomainError("marcum_q requires m >= 1/2");
    if (!(u >= 0.0) || !(v >= 0.0)) throw DomainError("marcum_q requires u, v >= 0");
    if (v == 0.0) return 1.0;
    if (std::isinf(v)) return 0.0;
    return detail::gamma_poisson_mixture(m, 0.5 * u * u, 0.5 * v * v).q;
}

/// P(chi2_n(lambda) <= x).
inline double chisq_cdf(const NoncentralChiSq& dist, double x) {
    if (std::isnan(x)) throw DomainError("chisq_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    const double half_dof = 0.5 * dist.dof;
    if (dist.noncentrality == 0.0) return regularized_gamma(half_dof, 0.5 * x).p;
    return 1.0 - marcum_q(half_dof, std::sqrt(dist.noncentrality), std::sqrt(x));
}

/// Density of chi2_n(lambda) at x.
inline double chisq_pdf(const NoncentralChiSq& dist, double x) {
    if (x <= 0.0) {
        if (x == 0.0 && dist.dof == 2) return 0.5 * std::exp(-0.5 * dist.noncentrality);
        if (x == 0.0 && dist.dof == 1) return std::numeric_limits<double>::infinity();
        return 0.0;
    }
    const auto mix = detail::gamma_poisson_mixture(0.5 * dist.dof, 0.5 * dist.noncentrality, 0.5 * x);
    return 0.5 * mix.density;
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Standard normal quantile: rational approximation refined by one Halley step.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile requires 0 < p < 1");
    if (p == 0.5) return 0.0;
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    // Work in the lower half and reflect, so the symmetry holds bitwise.
    const bool upper = p > 0.5;
    const double pl = upper ? 1.0 - p : p;
    double x;
    if (pl < p_low) {
        const double q = std::sqrt(-2.0 * std::log(pl));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = pl - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - pl;
        const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return upper ? -x : x;
}

/// Closed-form bounds on the (1 - alpha)-quantile of chi2_n(lambda), stated
/// for 0 < alpha <= 1/sqrt(2 pi). The upper bound always holds; the lower one
/// rests on q_N(1-alpha) >= sqrt(log(1/alpha)), which fails once alpha exceeds
/// about 0.032, so it is only a true bound for small alpha.
inline QuantileBounds quantile_bounds_ncchisq(int dof, double lambda, double alpha) {
    const double alpha_max = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    if (dof < 1) throw DomainError("quantile bounds require dof >= 1");
    if (!(lambda >= 0.0)) throw DomainError("quantile bounds require lambda >= 0");
    if (!(alpha > 0.0 && alpha <= alpha_max))
        throw DomainError("quantile bounds require 0 < alpha <= 1/sqrt(2 pi), got " +
                          std::to_string(alpha));
    const double n = dof;
    const double log_inv = std::log(1.0 / alpha);
    const double root_lambda = std::sqrt(lambda);
    const double lower = n - 1.0 + 2.0 * std::sqrt(log_inv) * root_lambda + lambda + log_inv;
    const double gauss = std::sqrt(2.0 * log_inv);
    const double upper = (std::sqrt(n) + gauss) * (std::sqrt(n) + gauss) + 2.0 * gauss * root_lambda + lambda;
    return {lower, upper};
}

/// Chebyshev lower bound on the beta-quantile of chi2_n(lambda), 0 < beta < 0.5.
inline double quantile_lower_bound_beta(int dof, double lambda, double beta) {
    if (!(beta > 0.0 && beta < 0.5)) throw DomainError("quantile_lower_bound_beta requires 0 < beta < 0.5");
    const double n = dof;
    return n + lambda - std::sqrt(2.0 * (n + 2.0 * lambda) / beta);
}

/// Inverse CDF of chi2_n(lambda): |chisq_cdf(q) - p| <= 1e-10.
inline double chisq_quantile(const NoncentralChiSq& dist, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("chisq_quantile requires 0 < p < 1");
    const int n = dist.dof;
    const double lambda = dist.noncentrality;
    const double alpha = 1.0 - p;

    double lo = 0.0;
    double hi = 0.0;
    if (alpha <= 0.5) {
        const double g = std::sqrt(2.0 * std::log(1.0 / alpha));
        hi = (std::sqrt(n) + g) * (std::sqrt(n) + g) + 2.0 * g * std::sqrt(lambda) + lambda;
        if (alpha <= 1.0 / std::sqrt(2.0 * std::numbers::pi))
            lo = std::max(0.0, quantile_bounds_ncchisq(n, lambda, alpha).lower);
    } else {
        const double g = std::sqrt(2.0 * std::log(2.0));
        hi = (std::sqrt(n) + g) * (std::sqrt(n) + g) + lambda;
        lo = std::max(0.0, quantile_lower_bound_beta(n, lambda, p));
    }

    const auto residual = [&](double x) { return chisq_cdf(dist, x) - p; };
    double f_lo = residual(lo);
    double f_hi = residual(hi);
    // The closed-form lower bound is not valid for every alpha it is stated for.
    if (f_lo > 0.0) {
        lo = 0.0;
        f_lo = -p;
    }
    if (f_hi < 0.0) {
        hi = std::max(hi, n + lambda + 20.0 * std::sqrt(2.0 * (n + 2.0 * lambda)));
        f_hi = residual(hi);
        for (int k = 0; k < 60 && f_hi < 0.0; ++k) {
            lo = hi;
            hi *= 2.0;
            f_hi = residual(hi);
        }
        if (f_hi < 0.0)
            throw BracketFailure("chisq_quantile could not bracket p=" + std::to_string(p));
        f_lo = residual(lo);
    }
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;

    // Bisection to a narrow bracket, then safeguarded Newton.
    const double scale = std::sqrt(dist.variance());
    while (hi - lo > 0.05 * scale) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) < 0.0 ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    double best_x = x;
    double best_r = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        const double r = residual(x);
        if (std::abs(r) < std::abs(best_r)) {
            best_r = r;
            best_x = x;
        }
        if (std::abs(r) <= 1e-14) break;
        (r < 0.0 ? lo : hi) = x;
        const double density = chisq_pdf(dist, x);
        double next = density > 0.0 && std::isfinite(density) ? x - r / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * detail::kEps * std::max(1.0, x)) {
            x = next;
            break;
        }
        x = next;
    }
    const double r = residual(x);
    if (std::abs(r) < std::abs(best_r)) {
        best_r = r;
        best_x = x;
    }
    if (!(std::abs(best_r) <= 1e-10))
        throw NumericFailure("chisq_quantile failed to converge (residual " + std::to_string(best_r) + ")");
    return best_x;
}

}  // namespace sdetest
