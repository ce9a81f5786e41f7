#ifndef NORMCRM_SPECFUN_HPP_
#define NORMCRM_SPECFUN_HPP_

#include <cmath>
#include <limits>
#include <stdexcept>

#include "normcrm/common.hpp"

namespace normcrm {

/// Modified Bessel function I_nu(s) by direct power series
/// sum_m (s/2)^(2m+nu) / (m! Gamma(nu+m+1)).
inline double bessel_i(double nu, double s, const SeriesControl& ctrl = {}) {
    if (nu < 0.0 || s < 0.0) throw std::domain_error("bessel_i: need nu>=0, s>=0");
    if (s == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    if (s > 700.0) {
        throw std::range_error("bessel_i: result overflows for s > 700; use bessel_i_scaled");
    }
    double term = std::exp(nu * std::log(0.5 * s) - std::lgamma(nu + 1.0));
    double sum = term;
    const double q = 0.25 * s * s;
    for (int m = 0; m < ctrl.max_terms; ++m) {
        term *= q / ((m + 1.0) * (nu + m + 1.0));
        sum += term;
        if (term < ctrl.rel_tol * sum) return sum;
    }
    throw AccuracyError("bessel_i: series did not converge", sum, term);
}

/// Exponentially scaled variant e^{-s} I_nu(s); finite for all s >= 0.
inline double bessel_i_scaled(double nu, double s, const SeriesControl& ctrl = {}) {
    if (nu < 0.0 || s < 0.0) throw std::domain_error("bessel_i_scaled: need nu>=0, s>=0");
    if (s < 40.0) return std::exp(-s) * bessel_i(nu, s, ctrl);
    // Asymptotic expansion I_nu(s) ~ e^s/sqrt(2 pi s) * sum_k (-1)^k a_k(nu)/s^k,
    // truncated at the smallest term.
    const double mu4 = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 40; ++k) {
        const double f = (2.0 * k - 1.0);
        term *= (f * f - mu4) / (8.0 * k * s);
        if (std::abs(term) >= prev) break;
        sum += term;
        prev = std::abs(term);
        if (std::abs(term) < ctrl.rel_tol * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * M_PI * s);
}

/// Gauss hypergeometric series 2F1(a,b;1;z) for z in [0,1). Terms are all
/// nonnegative for a,b > 0, so the sum is monotone in z and >= 1.
inline double hyp2f1_unit_c(double a, double b, double z, const SeriesControl& ctrl = {}) {
    if (!(z >= 0.0) || z >= 1.0) {
        throw std::domain_error("hyp2f1_unit_c: series requires 0 <= z < 1");
    }
    double term = 1.0;
    double sum = 1.0;
    for (int m = 0; m < ctrl.max_terms; ++m) {
        term *= (a + m) * (b + m) / ((1.0 + m) * (1.0 + m)) * z;
        sum += term;
        if (term < ctrl.rel_tol * sum) return sum;
    }
    // Slowly convergent only as z -> 1 (argument 1/(u+omega)^2 with omega ~ 1).
    const double ratio = z;  // asymptotic term ratio
    const double tail = term * ratio / (1.0 - ratio);
    throw AccuracyError("hyp2f1_unit_c: series did not converge (z too close to 1)",
                        sum + tail, tail);
}

/// Exponential integral E1(x) = int_x^inf t^-1 e^-t dt, x > 0.
inline double exp_integral_e1(double x) {
    if (!(x > 0.0)) throw std::domain_error("exp_integral_e1: need x > 0");
    if (x <= 1.0) {
        // -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
        constexpr double kEulerGamma = 0.57721566490153286061;
        double sum = -kEulerGamma - std::log(x);
        double term = 1.0;
        for (int k = 1; k <= 40; ++k) {
            term *= -x / k;
            sum -= term / k;
            if (std::abs(term / k) < 1e-17 * std::abs(sum)) break;
        }
        return sum;
    }
    if (x > 740.0) return 0.0;  // below double underflow of e^-x/x
    // Modified Lentz continued fraction e^-x / (x+1 - 1/(x+3 - 4/(x+5 - ...)))
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x) * h;
}

namespace detail {

// Continued fraction for Gamma(a,x) * e^x * x^-a, valid for x >= a+1
// (works for negative a as well).
inline double upper_gamma_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

// Regularized lower incomplete gamma P(a,x) by series, for x < a+1, a > 0.
inline double lower_gamma_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n <= 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// log Gamma(a,x) for a > 0, x >= 0 (upper incomplete gamma, unnormalized).
inline double log_upper_gamma(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("log_upper_gamma: need a>0, x>=0");
    if (x == 0.0) return std::lgamma(a);
    if (x < a + 1.0) {
        const double p = detail::lower_gamma_series(a, x);
        return std::lgamma(a) + std::log1p(-p);
    }
    return -x + a * std::log(x) + std::log(detail::upper_gamma_cf(a, x));
}

/// Regularized incomplete gamma P(a,x) and Q(a,x) = 1 - P(a,x), a > 0.
inline double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("regularized_gamma_p: need a>0, x>=0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::lower_gamma_series(a, x);
    const double lq = -x + a * std::log(x) + std::log(detail::upper_gamma_cf(a, x)) -
                      std::lgamma(a);
    return 1.0 - std::exp(lq);
}

inline double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("regularized_gamma_q: need a>0, x>=0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::lower_gamma_series(a, x);
    return std::exp(-x + a * std::log(x) + std::log(detail::upper_gamma_cf(a, x)) -
                    std::lgamma(a));
}

/// Upper incomplete gamma Gamma(a,x) for negative order a in [-1,0), x > 0.
/// For x >= 1 the continued fraction applies directly; for small x the value
/// is anchored at a+1 through Gamma(a,x) = (Gamma(a+1,x) - x^a e^-x)/a.
inline double upper_incomplete_gamma_neg(double a, double x) {
    if (!(a >= -1.0) || !(a < 0.0)) {
        throw std::domain_error("upper_incomplete_gamma_neg: need -1 <= a < 0");
    }
    if (!(x > 0.0)) throw std::domain_error("upper_incomplete_gamma_neg: need x > 0");
    if (x >= 1.0) {
        if (x > 740.0) return 0.0;
        return std::exp(-x + a * std::log(x)) * detail::upper_gamma_cf(a, x);
    }
    const double q = a + 1.0;  // in [0,1)
    const double g1 = (q == 0.0) ? exp_integral_e1(x) : std::exp(log_upper_gamma(q, x));
    return (g1 - std::exp(a * std::log(x) - x)) / a;
}

/// log of sum(exp(values)) without overflow; -inf for an empty range.
template <typename It>
double log_sum_exp(It first, It last) {
    double mx = -std::numeric_limits<double>::infinity();
    for (It it = first; it != last; ++it) mx = std::max(mx, *it);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (It it = first; it != last; ++it) s += std::exp(*it - mx);
    return mx + std::log(s);
}

}  // namespace normcrm

#endif  // NORMCRM_SPECFUN_HPP_
