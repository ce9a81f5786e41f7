#ifndef NORMCRM_RANDOM_HPP_
#define NORMCRM_RANDOM_HPP_

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "normcrm/specfun.hpp"

namespace normcrm {

using Rng = std::mt19937_64;

inline double draw_uniform(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double draw_normal(double mean, double sd, Rng& rng) {
    return std::normal_distribution<double>(mean, sd)(rng);
}

/// Gamma draw in shape/rate parametrization.
inline double draw_gamma(double shape, double rate, Rng& rng) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

/// Inverse-gamma(shape, scale): mean scale/(shape-1) for shape > 1.
inline double draw_inv_gamma(double shape, double scale, Rng& rng) {
    double g = 0.0;
    do {
        g = draw_gamma(shape, scale, rng);
    } while (g == 0.0);
    return 1.0 / g;
}

inline long draw_poisson(double mean, Rng& rng) {
    return std::poisson_distribution<long>(mean)(rng);
}

inline int categorical_from_weights(const std::vector<double>& w, Rng& rng) {
    double total = 0.0;
    for (double v : w) total += v;
    if (!(total > 0.0)) throw std::domain_error("categorical: nonpositive total weight");
    double u = draw_uniform(rng) * total;
    for (std::size_t j = 0; j + 1 < w.size(); ++j) {
        u -= w[j];
        if (u <= 0.0) return static_cast<int>(j);
    }
    return static_cast<int>(w.size()) - 1;
}

/// Draws an index with probabilities proportional to exp(logw), max-shifted.
inline int categorical_from_logweights(const std::vector<double>& logw, Rng& rng) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logw) mx = std::max(mx, v);
    if (!std::isfinite(mx)) {
        throw std::domain_error("categorical: all log-weights are -inf");
    }
    double total = 0.0;
    std::vector<double> w(logw.size());
    for (std::size_t j = 0; j < logw.size(); ++j) {
        w[j] = std::exp(logw[j] - mx);
        total += w[j];
    }
    double u = draw_uniform(rng) * total;
    for (std::size_t j = 0; j + 1 < w.size(); ++j) {
        u -= w[j];
        if (u <= 0.0) return static_cast<int>(j);
    }
    return static_cast<int>(logw.size()) - 1;
}

}  // namespace normcrm

#endif  // NORMCRM_RANDOM_HPP_
