#ifndef NORMCRM_CRM_HPP_
#define NORMCRM_CRM_HPP_

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "normcrm/intensity.hpp"
#include "normcrm/quadrature.hpp"
#include "normcrm/random.hpp"
#include "normcrm/specfun.hpp"

namespace normcrm {

/// Truncation threshold epsilon and total-mass multiplier kappa of the
/// approximating measure.
struct TruncationSpec {
    double epsilon;
    double kappa;

    TruncationSpec(double eps, double kap) : epsilon(eps), kappa(kap) {
        if (!(eps > 0.0)) throw std::domain_error("TruncationSpec: epsilon must be > 0");
        if (!(kap > 0.0)) throw std::domain_error("TruncationSpec: kappa must be > 0");
    }
};

using Location = std::vector<double>;

/// One draw of the truncated random probability: jumps J_0..J_N (> epsilon),
/// their support points, the total mass and the normalized weights.
struct EpsRealization {
    std::vector<double> jumps;
    std::vector<Location> locations;
    double total_mass = 0.0;
    std::vector<double> weights;

    std::size_t atoms() const { return jumps.size(); }
};

struct JumpSampleStats {
    long long fallback_draws = 0;  // draws that degraded to grid inversion
};

namespace detail {

// log of kappa * int_eps^inf s^m e^{-u s} rho(s) ds for the Bessel intensity,
// as a series of incomplete-gamma integrals of the I_0 expansion. Requires
// r = omega + u > 1; converges geometrically at rate 1/r^2.
inline bool log_bessel_moment_series(double log_kappa, double r, double eps, int m,
                                     double* out) {
    const double x = r * eps;
    const double logr = std::log(r);
    const int j0 = (m == 0) ? 1 : 0;
    double mx = -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    const int cap = 250000;
    for (int j = j0; j < j0 + cap; ++j) {
        const double q = m + 2.0 * j;
        const double lt = log_upper_gamma(q, x) - j * std::log(4.0) -
                          2.0 * std::lgamma(j + 1.0) - q * logr;
        if (lt > mx) {
            acc = acc * std::exp(mx - lt) + 1.0;
            mx = lt;
        } else {
            acc += std::exp(lt - mx);
        }
        const double total = mx + std::log(acc);
        if (lt < prev && lt < total + std::log(1e-17)) {
            if (m == 0) {
                // add the gamma-process part E1(x)
                const double e1 = exp_integral_e1(x);
                if (e1 > 0.0) {
                    const double le1 = std::log(e1);
                    const double hi = std::max(le1, total);
                    *out = log_kappa + hi +
                           std::log(std::exp(le1 - hi) + std::exp(total - hi));
                    return true;
                }
            }
            *out = log_kappa + total;
            return true;
        }
        prev = lt;
    }
    return false;
}

// Quadrature fallback for the Bessel moment, mode-shifted so large m stays
// representable.
inline double log_bessel_moment_quad(double log_kappa, double r, double eps, int m) {
    const double beta = r - 1.0;
    auto lt = [m, beta](double s) {
        return (m - 1.0) * std::log(s) - beta * s + std::log(bessel_i_scaled(0.0, s));
    };
    double s_star = (m > 1 && beta > 0.0) ? (m - 1.0) / beta : 1.0;
    s_star = std::max(s_star, eps * (1.0 + 1e-9));
    const double shift = lt(s_star);
    auto f = [&lt, shift](double s) { return std::exp(lt(s) - shift); };
    const double scale = (beta > 0.0) ? std::max((m + 1.0) / beta, 1.0) : 1.0;
    QuadControl ctrl{1e-300, 1e-10, 4000};
    const auto res = integrate_semi_infinite(f, eps, ctrl, scale);
    return log_kappa + shift + std::log(quad_value_or_throw(res, "bessel moment"));
}

}  // namespace detail

/// log of kappa * int_eps^inf s^m e^{-u s} rho(s) ds  (m >= 0).
inline double log_tilted_moment(const Intensity& in, const TruncationSpec& trunc,
                                double u, int m) {
    if (!(u >= 0.0)) throw std::domain_error("tilted moment: need u >= 0");
    if (m < 0) throw std::domain_error("tilted moment: need m >= 0");
    const double eps = trunc.epsilon;
    const double r = in.omega() + u;
    const double log_kappa = std::log(trunc.kappa);
    switch (in.family()) {
        case IntensityFamily::Gamma: {
            if (m == 0) {
                const double e1 = exp_integral_e1(r * eps);
                return log_kappa + std::log(e1);
            }
            return log_kappa + log_upper_gamma(m, r * eps) - m * std::log(r);
        }
        case IntensityFamily::GeneralizedGamma: {
            const double sig = in.sigma();
            if (m == 0) {
                const double g = upper_incomplete_gamma_neg(-sig, r * eps);
                return log_kappa + sig * std::log(r) + std::log(g) -
                       std::lgamma(1.0 - sig);
            }
            return log_kappa - std::lgamma(1.0 - sig) + log_upper_gamma(m - sig, r * eps) -
                   (m - sig) * std::log(r);
        }
        case IntensityFamily::Bessel: {
            if (m >= 1 && !(r > 1.0)) {
                throw std::domain_error(
                    "tilted moment (bessel): integral diverges for omega + u <= 1");
            }
            double out = 0.0;
            if (r > 1.0005 &&
                detail::log_bessel_moment_series(log_kappa, r, eps, m, &out)) {
                return out;
            }
            return detail::log_bessel_moment_quad(log_kappa, r, eps, m);
        }
    }
    return 0.0;  // unreachable
}

inline double tilted_moment(const Intensity& in, const TruncationSpec& trunc, double u,
                            int m) {
    return std::exp(log_tilted_moment(in, trunc, u, m));
}

/// Lambda_{eps,u} = kappa int_eps^inf e^{-u s} rho(s) ds.
inline double tilted_tail_mass(const Intensity& in, const TruncationSpec& trunc,
                               double u) {
    return tilted_moment(in, trunc, u, 0);
}

/// Lambda_eps = kappa int_eps^inf rho(s) ds.
inline double tail_mass(const Intensity& in, const TruncationSpec& trunc) {
    return tilted_tail_mass(in, trunc, 0.0);
}

/// Laplace exponent psi(lambda) = kappa int_0^inf (1 - e^{-lambda s}) rho(s) ds,
/// in closed form per family.
inline double laplace_exponent(const Intensity& in, double kappa, double lam) {
    if (!(lam >= 0.0)) throw std::domain_error("laplace_exponent: need lambda >= 0");
    if (!(kappa > 0.0)) throw std::domain_error("laplace_exponent: need kappa > 0");
    if (lam == 0.0) return 0.0;
    const double w = in.omega();
    switch (in.family()) {
        case IntensityFamily::Gamma:
            return kappa * std::log((w + lam) / w);
        case IntensityFamily::GeneralizedGamma: {
            const double sig = in.sigma();
            return kappa * (std::pow(w + lam, sig) - std::pow(w, sig)) / sig;
        }
        case IntensityFamily::Bessel: {
            const double wl = w + lam;
            return kappa * std::log((wl + std::sqrt(wl * wl - 1.0)) /
                                    (w + std::sqrt(w * w - 1.0)));
        }
    }
    return 0.0;  // unreachable
}

/// Verification route for the Laplace exponent by quadrature of its
/// defining integral.
inline double laplace_exponent_quadrature(const Intensity& in, double kappa,
                                          double lam) {
    if (lam == 0.0) return 0.0;
    auto f = [&in, lam](double s) {
        return -std::expm1(-lam * s) * in.density(s);
    };
    QuadControl ctrl{1e-13, 1e-10, 8000};
    const auto res = integrate_semi_infinite(f, 0.0, ctrl, 1.0 / in.omega());
    return kappa * quad_value_or_throw(res, "laplace_exponent_quadrature");
}

namespace detail {

inline constexpr int kJumpMaxTries = 20000;

inline double draw_trunc_gamma(double shape, double rate, double lower, Rng& rng,
                               int max_tries, int* used) {
    for (int t = 0; t < max_tries; ++t) {
        const double s = draw_gamma(shape, rate, rng);
        ++*used;
        if (s > lower) return s;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Inverse-cdf draw from density proportional to s^{-1-sig} on (a, b].
inline double draw_powerlaw(double sig, double a, double b, Rng& rng) {
    const double v = draw_uniform(rng);
    if (sig == 0.0) return a * std::pow(b / a, v);
    const double pa = std::pow(a, -sig);
    const double pb = std::pow(b, -sig);
    return std::pow(pa - v * (pa - pb), -1.0 / sig);
}

// Gamma / generalized-gamma jump with power = 0:
// target ~ s^{-1-sig} e^{-r s} on (eps, inf).
inline double sample_jump_power0_gammafam(double sig, double r, double eps, Rng& rng,
                                          int* used) {
    const double s0 = std::max(2.0 * eps, std::min(1.0, 1.0 / r));
    const double area1 = (sig == 0.0) ? std::log(s0 / eps)
                                      : (std::pow(eps, -sig) - std::pow(s0, -sig)) / sig;
    const double w1 = std::exp(-r * eps) * area1;
    const double w2 = std::pow(s0, -1.0 - sig) * std::exp(-r * s0) / r;
    while (*used < kJumpMaxTries) {
        ++*used;
        if (draw_uniform(rng) * (w1 + w2) < w1) {
            const double s = draw_powerlaw(sig, eps, s0, rng);
            if (draw_uniform(rng) < std::exp(-r * (s - eps))) return s;
        } else {
            const double s = s0 + draw_gamma(1.0, r, rng);
            if (draw_uniform(rng) < std::pow(s0 / s, 1.0 + sig)) return s;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Bessel jump with power = 0: target ~ s^{-1} e^{-beta s} q(s) on (eps, inf),
// beta = omega + u - 1 >= 0, q(s) = e^{-s} I_0(s) <= min(1, 1/sqrt(pi s)).
inline double sample_jump_power0_bessel(double beta, double eps, Rng& rng, int* used) {
    const double s0 = std::max(2.0 * eps, std::min(1.0, 1.0 / std::max(beta, 1.0)));
    const double w1 = std::exp(-beta * eps) * std::log(s0 / eps);
    const bool pareto_tail = beta * s0 <= 0.25;
    const double sqrt_pi = 1.77245385090551603;
    const double w2 = pareto_tail
                          ? std::exp(-beta * s0) * 2.0 / (std::sqrt(s0) * sqrt_pi)
                          : std::exp(-beta * s0) / (std::pow(s0, 1.5) * sqrt_pi * beta);
    while (*used < kJumpMaxTries) {
        ++*used;
        if (draw_uniform(rng) * (w1 + w2) < w1) {
            const double s = draw_powerlaw(0.0, eps, s0, rng);
            const double acc = std::exp(-beta * (s - eps)) * bessel_i_scaled(0.0, s);
            if (draw_uniform(rng) < acc) return s;
        } else if (pareto_tail) {
            const double v = draw_uniform(rng);
            const double s = s0 / ((1.0 - v) * (1.0 - v));
            const double acc = std::exp(-beta * (s - s0)) * bessel_i_scaled(0.0, s) *
                               std::sqrt(M_PI * s);
            if (draw_uniform(rng) < acc) return s;
        } else {
            const double s = s0 + draw_gamma(1.0, beta, rng);
            const double acc = sqrt_pi * bessel_i_scaled(0.0, s) *
                               std::pow(s0, 1.5) / s;
            if (draw_uniform(rng) < acc) return s;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Bessel jump with power >= 1: target ~ s^{power-1} e^{-beta s} q(s), beta > 0.
// Two dominating truncated-gamma envelopes; the tighter one is used.
inline double sample_jump_bessel_powered(int power, double beta, double eps, Rng& rng,
                                         int* used) {
    const double log_mass_a =
        log_upper_gamma(power, beta * eps) - power * std::log(beta);
    const double log_mass_b = log_upper_gamma(power - 0.5, beta * eps) -
                              (power - 0.5) * std::log(beta) -
                              0.5 * std::log(M_PI);
    const bool use_b = log_mass_b < log_mass_a;
    const double shape = use_b ? power - 0.5 : power;
    while (*used < kJumpMaxTries) {
        const double s = draw_trunc_gamma(shape, beta, eps, rng,
                                          kJumpMaxTries - *used, used);
        if (!std::isfinite(s)) break;
        const double q = bessel_i_scaled(0.0, s);
        const double acc = use_b ? q * std::sqrt(M_PI * s) : q;
        if (draw_uniform(rng) < acc) return s;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Deterministic-grid inversion fallback; approximate but contractual as a
// last resort, counted in JumpSampleStats.
inline double sample_jump_grid(const Intensity& in, double eps, double u, int power,
                               Rng& rng) {
    auto lt = [&in, u, power](double s) {
        return power * std::log(s) - u * s + in.log_density(s);
    };
    double hi = std::max(2.0 * eps, 1.0);
    double peak = lt(eps * (1.0 + 1e-9));
    for (int i = 0; i < 200; ++i) {
        const double v = lt(hi);
        peak = std::max(peak, v);
        if (v < peak - 60.0) break;
        hi *= 1.7;
    }
    constexpr int K = 4096;
    std::vector<double> y(K), cum(K, 0.0);
    const double ly0 = std::log(eps * (1.0 + 1e-12));
    const double ly1 = std::log(hi);
    double prev_g = 0.0;
    for (int i = 0; i < K; ++i) {
        y[i] = ly0 + (ly1 - ly0) * i / (K - 1);
        const double s = std::exp(y[i]);
        const double g = std::exp(lt(s) - peak) * s;  // density in log-s coords
        if (i > 0) cum[i] = cum[i - 1] + 0.5 * (g + prev_g) * (y[i] - y[i - 1]);
        prev_g = g;
    }
    const double total = cum[K - 1];
    if (!(total > 0.0)) throw std::runtime_error("sample_jump: degenerate grid fallback");
    const double target = draw_uniform(rng) * total;
    int lo = 0, hi_i = K - 1;
    while (hi_i - lo > 1) {
        const int mid = (lo + hi_i) / 2;
        (cum[mid] < target ? lo : hi_i) = mid;
    }
    const double frac = (target - cum[lo]) / std::max(cum[hi_i] - cum[lo], 1e-300);
    return std::exp(y[lo] + frac * (y[hi_i] - y[lo]));
}

}  // namespace detail

/// One exact draw from the density proportional to
/// s^power e^{-u s} rho(s) 1(s > eps). power = 0 with u = 0 is a prior jump of
/// the truncated measure; power = n_i gives an allocated-jump draw.
inline double sample_jump(const Intensity& in, double eps, double u, int power,
                          Rng& rng, JumpSampleStats* stats = nullptr) {
    if (!(eps > 0.0)) throw std::domain_error("sample_jump: need eps > 0");
    if (!(u >= 0.0) || power < 0) throw std::domain_error("sample_jump: bad u/power");
    const double r = in.omega() + u;
    int used = 0;
    double s = std::numeric_limits<double>::quiet_NaN();
    switch (in.family()) {
        case IntensityFamily::Gamma:
        case IntensityFamily::GeneralizedGamma: {
            const double sig = in.sigma();
            if (power == 0) {
                s = detail::sample_jump_power0_gammafam(sig, r, eps, rng, &used);
            } else {
                s = detail::draw_trunc_gamma(power - sig, r, eps, rng,
                                             detail::kJumpMaxTries, &used);
            }
            break;
        }
        case IntensityFamily::Bessel: {
            const double beta = r - 1.0;
            if (power == 0) {
                s = detail::sample_jump_power0_bessel(beta, eps, rng, &used);
            } else if (!(beta > 0.0)) {
                throw std::domain_error(
                    "sample_jump (bessel): target not normalizable for omega + u <= 1");
            } else {
                s = detail::sample_jump_bessel_powered(power, beta, eps, rng, &used);
            }
            break;
        }
    }
    if (std::isfinite(s)) return s;
    if (stats != nullptr) ++stats->fallback_draws;
    return detail::sample_jump_grid(in, eps, u, power, rng);
}

/// Prior simulation of the truncated normalized measure: N ~ Poisson(Lambda_eps)
/// plus one guaranteed extra atom, jumps iid from rho_eps, locations iid from
/// the base measure, weights by normalization.
template <typename BaseSampler>
EpsRealization sample_prior_realization(const Intensity& in, const TruncationSpec& trunc,
                                        BaseSampler&& base, Rng& rng,
                                        JumpSampleStats* stats = nullptr) {
    const double lambda = tail_mass(in, trunc);
    if (!std::isfinite(lambda)) throw std::domain_error("prior realization: Lambda_eps not finite");
    const long n_atoms = draw_poisson(lambda, rng) + 1;
    EpsRealization out;
    out.jumps.reserve(n_atoms);
    out.locations.reserve(n_atoms);
    for (long j = 0; j < n_atoms; ++j) {
        out.jumps.push_back(sample_jump(in, trunc.epsilon, 0.0, 0, rng, stats));
        out.locations.push_back(base(rng));
        out.total_mass += out.jumps.back();
    }
    out.weights.resize(n_atoms);
    for (long j = 0; j < n_atoms; ++j) out.weights[j] = out.jumps[j] / out.total_mass;
    return out;
}

namespace detail {

// Jump of the non-gamma part of the Bessel measure: density proportional to
// s^-1 e^{-omega s} (I_0(s) - 1), i.e. the mixture over m >= 1 of the
// finite-activity components. qd(s) = e^{-s}(I_0(s)-1) <= min(s^2/4, 1/sqrt(pi s)).
inline double qd_bessel_extra(double s) {
    // e^{-s}(I_0(s)-1); series for small s where the direct difference cancels
    if (s < 1e-3) return std::exp(-s) * 0.25 * s * s * (1.0 + s * s / 16.0);
    return bessel_i_scaled(0.0, s) - std::exp(-s);
}

inline double sample_bessel_extra_jump(double omega, Rng& rng) {
    const double beta = omega - 1.0;
    const double sqrt_pi = 1.77245385090551603;
    const bool gamma_head = beta >= 0.25;
    const double w1 =
        gamma_head ? 0.25 * (-std::expm1(-4.0 * beta) - 4.0 * beta * std::exp(-4.0 * beta)) /
                         (beta * beta)
                   : 2.0;
    const bool pareto_tail = beta <= 0.25;
    const double w2 = pareto_tail ? std::exp(-4.0 * beta) / sqrt_pi
                                  : std::exp(-4.0 * beta) / (8.0 * sqrt_pi * beta);
    for (int t = 0; t < 200000; ++t) {
        if (draw_uniform(rng) * (w1 + w2) < w1) {
            double s;
            if (gamma_head) {
                do {
                    s = draw_gamma(2.0, beta, rng);
                } while (s > 4.0);
            } else {
                s = 4.0 * std::sqrt(draw_uniform(rng));
                if (draw_uniform(rng) >= std::exp(-beta * s)) continue;
            }
            const double qd = qd_bessel_extra(s);
            if (draw_uniform(rng) < 4.0 * qd / (s * s)) return s;
        } else {
            if (pareto_tail) {
                const double v = draw_uniform(rng);
                const double s = 4.0 / ((1.0 - v) * (1.0 - v));
                const double qd = qd_bessel_extra(s);
                if (draw_uniform(rng) <
                    std::exp(-beta * (s - 4.0)) * qd * std::sqrt(M_PI * s)) {
                    return s;
                }
            } else {
                const double s = 4.0 + draw_gamma(1.0, beta, rng);
                const double qd = qd_bessel_extra(s);
                if (draw_uniform(rng) < sqrt_pi * 8.0 * qd / s) return s;
            }
        }
    }
    throw std::runtime_error("sample_bessel_extra_jump: rejection cap exceeded");
}

}  // namespace detail

/// Total mass of the (untruncated) normalized Bessel measure by superposition:
/// a gamma(kappa, omega) part plus a compound-Poisson part whose jump density
/// is the exact mixture of the finite-activity components.
inline double sample_bessel_total_mass(double omega, double kappa, Rng& rng) {
    if (!(omega >= 1.0) || !(kappa > 0.0)) {
        throw std::domain_error("sample_bessel_total_mass: need omega >= 1, kappa > 0");
    }
    double total = draw_gamma(kappa, omega, rng);
    const double ratio2 = 1.0 / (omega * omega);
    const double extra_rate = kappa * -std::log(0.5 * (1.0 + std::sqrt(1.0 - ratio2)));
    const long n = draw_poisson(extra_rate, rng);
    for (long j = 0; j < n; ++j) total += detail::sample_bessel_extra_jump(omega, rng);
    return total;
}

}  // namespace normcrm

#endif  // NORMCRM_CRM_HPP_
