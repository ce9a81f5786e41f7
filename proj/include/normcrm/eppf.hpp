#ifndef NORMCRM_EPPF_HPP_
#define NORMCRM_EPPF_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "normcrm/crm.hpp"
#include "normcrm/intensity.hpp"
#include "normcrm/quadrature.hpp"
#include "normcrm/random.hpp"
#include "normcrm/specfun.hpp"

namespace normcrm {

/// Cluster-size vector (n_1,...,n_k) of a partition of n = sum n_i elements.
struct Composition {
    std::vector<int> counts;
    int n = 0;
    int k = 0;

    explicit Composition(std::vector<int> c) : counts(std::move(c)) {
        k = static_cast<int>(counts.size());
        if (k < 1) throw std::domain_error("Composition: needs at least one block");
        for (int v : counts) {
            if (v < 1) throw std::domain_error("Composition: block sizes must be >= 1");
            n += v;
        }
    }
};

/// log f_eps(u; n_1..n_k): the integrand whose u-integral is the truncated
/// eppf, assembled on log scale from the tilted tail mass and moments.
inline double log_eppf_integrand(const Intensity& in, const TruncationSpec& trunc,
                                 const Composition& comp, double u,
                                 double lambda_eps) {
    const double lam_u = tilted_tail_mass(in, trunc, u);
    double v = (comp.n - 1.0) * std::log(u) - std::lgamma(comp.n) +
               std::log(comp.k + lam_u) - std::log(lambda_eps) + (lam_u - lambda_eps);
    for (int ni : comp.counts) v += log_tilted_moment(in, trunc, u, ni);
    return v;
}

inline double log_eppf_integrand(const Intensity& in, const TruncationSpec& trunc,
                                 const Composition& comp, double u) {
    return log_eppf_integrand(in, trunc, comp, u, tail_mass(in, trunc));
}

namespace detail {

// Split point heuristic for the u-integral: the integrand peaks near
// n / E(T_eps). Falls back to a tilted estimate when the first moment of the
// truncated measure diverges (Bessel with omega = 1).
inline double eppf_u_split(const Intensity& in, const TruncationSpec& trunc, int n) {
    double expected_mass;
    try {
        expected_mass = tilted_moment(in, trunc, 0.0, 1);
    } catch (const std::exception&) {
        expected_mass = tilted_moment(in, trunc, 1.0, 1);
    }
    const double u = n / std::max(expected_mass, 1e-12);
    return std::clamp(u, 1e-3, 1e12);
}

template <typename LogF>
double integrate_log_density(LogF&& logf, double u_star, const QuadControl& ctrl) {
    const double shift = logf(u_star);
    auto f = [&logf, shift](double u) {
        const double lv = logf(u);
        return std::isfinite(lv) ? std::exp(lv - shift) : 0.0;
    };
    const auto head = integrate_adaptive(f, 0.0, u_star, ctrl);
    const auto tail = integrate_semi_infinite(f, u_star, ctrl, u_star);
    const double total = head.value + tail.value;
    const double err = head.error + tail.error;
    if (err > std::max(ctrl.abs_tol, 10.0 * ctrl.rel_tol * std::abs(total))) {
        throw AccuracyError("eppf: u-quadrature did not reach tolerance",
                            std::exp(shift) * total, std::exp(shift) * err);
    }
    return std::exp(shift) * total;
}

}  // namespace detail

/// eppf of the truncated normalized measure, by quadrature over the latent u.
inline double eppf_truncated(const Intensity& in, const TruncationSpec& trunc,
                             const Composition& comp) {
    const double lambda_eps = tail_mass(in, trunc);
    if (!std::isfinite(lambda_eps)) throw std::domain_error("eppf: Lambda_eps not finite");
    if (comp.n == 1) return 1.0;
    auto logf = [&](double u) {
        return log_eppf_integrand(in, trunc, comp, u, lambda_eps);
    };
    const double u_star = detail::eppf_u_split(in, trunc, comp.n);
    QuadControl ctrl{1e-300, 1e-9, 4000};
    return detail::integrate_log_density(logf, u_star, ctrl);
}

/// Dirichlet-process eppf Gamma(kappa)/Gamma(kappa+n) kappa^k prod Gamma(n_j).
inline double eppf_dirichlet(const Composition& comp, double kappa) {
    if (!(kappa > 0.0)) throw std::domain_error("eppf_dirichlet: kappa > 0 required");
    double lv = std::lgamma(kappa) - std::lgamma(kappa + comp.n) +
                comp.k * std::log(kappa);
    for (int ni : comp.counts) lv += std::lgamma(ni);
    return std::exp(lv);
}

/// eppf of the (untruncated) normalized Bessel measure via its closed-form
/// u-integral with the 2F1 factors.
inline double eppf_bessel(const Composition& comp, double omega, double kappa) {
    if (!(omega >= 1.0)) throw std::domain_error("eppf_bessel: omega >= 1 required");
    if (!(kappa > 0.0)) throw std::domain_error("eppf_bessel: kappa > 0 required");
    if (comp.n == 1) return 1.0;
    const double log_a = std::log(omega + std::sqrt(omega * omega - 1.0));
    double lg_counts = 0.0;
    for (int ni : comp.counts) lg_counts += std::lgamma(ni);
    auto logf = [&](double u) {
        const double w = u + omega;
        double lv = comp.k * std::log(kappa) + (comp.n - 1.0) * std::log(u) -
                    std::lgamma(comp.n) +
                    kappa * (log_a - std::log(w + std::sqrt(w * w - 1.0))) -
                    comp.n * std::log(w) + lg_counts;
        const double z = 1.0 / (w * w);
        for (int ni : comp.counts) {
            lv += std::log(hyp2f1_unit_c(0.5 * ni, 0.5 * (ni + 1.0), z));
        }
        return lv;
    };
    const double u_star = std::clamp(omega * comp.n / kappa, 1e-3, 1e12);
    QuadControl ctrl{1e-300, 1e-9, 4000};
    return detail::integrate_log_density(logf, u_star, ctrl);
}

/// Probability that a sample of size two from the truncated measure ties.
inline double pair_tie_prob(const Intensity& in, const TruncationSpec& trunc) {
    return eppf_truncated(in, trunc, Composition({2}));
}

struct PriorMoments {
    double mean1;
    double var1;
    double cov;
};

/// Mean/variance/covariance arithmetic given the two-sample tie probability.
inline PriorMoments prior_moments_from_tie(double tie2, double p0_b1, double p0_b2,
                                           double p0_b12) {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(p0_b1) || !in01(p0_b2) || !in01(p0_b12) ||
        p0_b12 > std::min(p0_b1, p0_b2) + 1e-12 ||
        p0_b12 < std::max(0.0, p0_b1 + p0_b2 - 1.0) - 1e-12) {
        throw std::domain_error("prior_moments: inconsistent base-measure masses");
    }
    PriorMoments m;
    m.mean1 = p0_b1;
    m.var1 = tie2 * p0_b1 * (1.0 - p0_b1);
    m.cov = tie2 * (p0_b12 - p0_b1 * p0_b2);
    return m;
}

inline PriorMoments prior_moments(const Intensity& in, const TruncationSpec& trunc,
                                  double p0_b1, double p0_b2, double p0_b12) {
    return prior_moments_from_tie(pair_tie_prob(in, trunc), p0_b1, p0_b2, p0_b12);
}

/// Law of the number of distinct values in a sample of size n.
struct KnDistribution {
    int n = 0;
    std::vector<double> prob;  // index k-1 holds P(K_n = k)
    std::vector<double> se;    // zero when exact
    bool exact = false;

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < prob.size(); ++i) m += (i + 1.0) * prob[i];
        return m;
    }
    double sd() const {
        const double m = mean();
        double v = 0.0;
        for (std::size_t i = 0; i < prob.size(); ++i) {
            v += (i + 1.0 - m) * (i + 1.0 - m) * prob[i];
        }
        return std::sqrt(v);
    }
    int mode() const {
        return 1 + static_cast<int>(std::max_element(prob.begin(), prob.end()) -
                                    prob.begin());
    }
};

/// Enumerates set partitions of {1..n} as block-size vectors (order of block
/// creation). Bell-number growth; guarded to n <= 14.
template <typename Fn>
void for_each_partition(int n, Fn&& fn) {
    if (n < 1 || n > 14) throw std::domain_error("for_each_partition: need 1 <= n <= 14");
    std::vector<int> counts;
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            fn(const_cast<const std::vector<int>&>(counts));
            return;
        }
        for (std::size_t j = 0; j < counts.size(); ++j) {
            ++counts[j];
            rec(i + 1);
            --counts[j];
        }
        counts.push_back(1);
        rec(i + 1);
        counts.pop_back();
    };
    rec(0);
}

/// Sum of the truncated eppf over all set partitions of {1..n}; equals one for
/// a proper species-sampling model.
inline double eppf_partition_sum(const Intensity& in, const TruncationSpec& trunc,
                                 int n) {
    std::map<std::vector<int>, double> cache;
    double total = 0.0;
    for_each_partition(n, [&](const std::vector<int>& counts) {
        std::vector<int> key = counts;
        std::sort(key.begin(), key.end());
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(key, eppf_truncated(in, trunc, Composition(key))).first;
        }
        total += it->second;
    });
    return total;
}

/// Exact law of K_n by enumeration of integer partitions (n <= 12):
/// P(K_n = k) = sum over multisets {n_1..n_k} of
///   multinomial(n; n_1..n_k) / prod_m mult_m! * p_eps(n_1..n_k).
inline KnDistribution prior_kn_exact(const Intensity& in, const TruncationSpec& trunc,
                                     int n) {
    if (n < 1 || n > 12) throw std::domain_error("prior_kn_exact: need 1 <= n <= 12");
    KnDistribution out;
    out.n = n;
    out.exact = true;
    out.prob.assign(n, 0.0);
    out.se.assign(n, 0.0);
    const double lg_n = std::lgamma(n + 1.0);
    std::vector<int> parts;
    std::function<void(int, int)> rec = [&](int remaining, int max_part) {
        if (remaining == 0) {
            const int k = static_cast<int>(parts.size());
            double lcoef = lg_n;
            for (int p : parts) lcoef -= std::lgamma(p + 1.0);
            int run = 1;
            for (std::size_t i = 1; i <= parts.size(); ++i) {
                if (i < parts.size() && parts[i] == parts[i - 1]) {
                    ++run;
                } else {
                    lcoef -= std::lgamma(run + 1.0);
                    run = 1;
                }
            }
            out.prob[k - 1] +=
                std::exp(lcoef) * eppf_truncated(in, trunc, Composition(parts));
            return;
        }
        for (int p = std::min(remaining, max_part); p >= 1; --p) {
            parts.push_back(p);
            rec(remaining - p, p);
            parts.pop_back();
        }
    };
    rec(n, n);
    return out;
}

/// Monte Carlo law of K_n: draw a prior realization, sample n atoms from its
/// weights, count distinct.
inline KnDistribution prior_kn_monte_carlo(const Intensity& in,
                                           const TruncationSpec& trunc, int n,
                                           int reps, Rng& rng) {
    if (n < 1 || reps < 1) throw std::domain_error("prior_kn_monte_carlo: bad n/reps");
    KnDistribution out;
    out.n = n;
    out.prob.assign(n, 0.0);
    out.se.assign(n, 0.0);
    auto base = [](Rng&) { return Location{}; };
    std::vector<char> seen;
    for (int r = 0; r < reps; ++r) {
        const auto real = sample_prior_realization(in, trunc, base, rng);
        seen.assign(real.atoms(), 0);
        int distinct = 0;
        for (int i = 0; i < n; ++i) {
            const int j = categorical_from_weights(real.weights, rng);
            if (!seen[j]) {
                seen[j] = 1;
                ++distinct;
            }
        }
        out.prob[distinct - 1] += 1.0;
    }
    for (int k = 0; k < n; ++k) {
        const double p = out.prob[k] / reps;
        out.prob[k] = p;
        out.se[k] = std::sqrt(p * (1.0 - p) / reps);
    }
    return out;
}

struct CalibrationTarget {
    enum class Kind { PairTie, ExpectedKn };
    Kind kind;
    double value;
    int n = 0;  // sample size for ExpectedKn

    static CalibrationTarget pair_tie(double q) {
        if (!(q > 0.0 && q < 1.0)) throw std::domain_error("calibrate: tie target in (0,1)");
        return {Kind::PairTie, q, 0};
    }
    static CalibrationTarget expected_kn(double m, int n) {
        if (!(m > 1.0 && m < n)) throw std::domain_error("calibrate: need 1 < m < n");
        return {Kind::ExpectedKn, m, n};
    }
};

struct CalibrationOptions {
    double rel_tol = 0.02;
    int reps = 20000;          // Monte Carlo size for ExpectedKn targets
    std::uint64_t seed = 20250811;  // fixed: the target function must be deterministic
    int max_expansions = 60;
};

struct CalibrationResult {
    double kappa;
    double achieved;
    std::uint64_t seed;
};

/// Monotone bisection on kappa. pair_tie_prob decreases in kappa and E(K_n)
/// increases; Monte Carlo targets reuse the same seed at every kappa so the
/// objective is a fixed deterministic function.
inline CalibrationResult calibrate_kappa(const Intensity& in, double epsilon,
                                         const CalibrationTarget& target,
                                         const CalibrationOptions& opts = {}) {
    auto eval = [&](double kappa) {
        TruncationSpec tr(epsilon, kappa);
        if (target.kind == CalibrationTarget::Kind::PairTie) {
            return pair_tie_prob(in, tr);
        }
        Rng rng(opts.seed);
        return prior_kn_monte_carlo(in, tr, target.n, opts.reps, rng).mean();
    };
    const bool increasing = target.kind == CalibrationTarget::Kind::ExpectedKn;
    auto above = [&](double g) { return increasing ? g > target.value : g < target.value; };

    double lo = 1e-4, hi = 1.0;
    double glo = eval(lo), ghi = eval(hi);
    int spent = 0;
    while (above(glo) == above(ghi) && spent < opts.max_expansions) {
        if (above(glo)) {
            hi = lo;
            ghi = glo;
            lo *= 0.25;
            glo = eval(lo);
        } else {
            lo = hi;
            glo = ghi;
            hi *= 4.0;
            ghi = eval(hi);
        }
        ++spent;
    }
    if (above(glo) == above(ghi)) {
        throw std::runtime_error(
            "calibrate_kappa: target not attainable; achieved range [" +
            std::to_string(std::min(glo, ghi)) + ", " + std::to_string(std::max(glo, ghi)) +
            "]");
    }
    double kappa = 0.5 * (lo + hi);
    double achieved = eval(kappa);
    for (int it = 0; it < 200; ++it) {
        if (std::abs(achieved - target.value) <= opts.rel_tol * target.value &&
            (hi - lo) <= 0.02 * kappa) {
            break;
        }
        if (above(achieved)) {
            hi = kappa;
        } else {
            lo = kappa;
        }
        if ((hi - lo) < 1e-12 * kappa) break;
        kappa = 0.5 * (lo + hi);
        achieved = eval(kappa);
    }
    return {kappa, achieved, opts.seed};
}

}  // namespace normcrm

#endif  // NORMCRM_EPPF_HPP_
