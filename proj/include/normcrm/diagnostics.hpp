#ifndef NORMCRM_DIAGNOSTICS_HPP_
#define NORMCRM_DIAGNOSTICS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "normcrm/archive.hpp"
#include "normcrm/dataset.hpp"
#include "normcrm/specfun.hpp"

namespace normcrm {

/// Predictive goodness-of-fit summary plus the posterior clustering outputs.
struct FitReport {
    double sse = 0.0;
    double ssae = 0.0;
    double lpml = 0.0;
    double waic1 = 0.0;
    double waic2 = 0.0;
    std::vector<double> cpo;           // per datum
    std::vector<double> kn_posterior;  // index k-1 holds P(K_n = k | data)
    std::vector<int> binder;           // Binder-loss point estimate of the partition
};

namespace detail {

// log of the mixture density at datum i for one sweep.
template <typename Model>
double sweep_log_density(const SweepRecord& s, const Dataset& data, const Model& model,
                         int i, const std::vector<double>& logw) {
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(s.jumps.size());
    for (std::size_t j = 0; j < s.jumps.size(); ++j) {
        terms[j] = logw[j] + model.log_kernel(data, i, s.locations[j], s.global);
        mx = std::max(mx, terms[j]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - mx);
    return mx + std::log(acc);
}

inline std::vector<double> sweep_log_weights(const SweepRecord& s) {
    std::vector<double> logw(s.jumps.size());
    const double lt = std::log(s.t_eps);
    for (std::size_t j = 0; j < s.jumps.size(); ++j) {
        logw[j] = std::log(s.jumps[j]) - lt;
    }
    return logw;
}

}  // namespace detail

/// Empirical posterior of the number of occupied clusters.
inline std::vector<double> kn_posterior(const ChainArchive& archive) {
    if (archive.sweeps.empty()) throw std::domain_error("kn_posterior: empty archive");
    int kmax = 0;
    for (const auto& s : archive.sweeps) kmax = std::max(kmax, s.k);
    std::vector<double> probs(kmax, 0.0);
    for (const auto& s : archive.sweeps) probs[s.k - 1] += 1.0;
    for (double& p : probs) p /= archive.sweeps.size();
    return probs;
}

/// Posterior co-clustering probabilities, flattened row-major (upper triangle
/// filled symmetrically).
inline std::vector<double> coclustering_matrix(const ChainArchive& archive) {
    const int n = archive.n_data;
    std::vector<double> pi(static_cast<std::size_t>(n) * n, 0.0);
    for (const auto& s : archive.sweeps) {
        std::vector<std::vector<int>> members(s.k);
        for (int i = 0; i < n; ++i) members[s.allocations[i]].push_back(i);
        for (const auto& m : members) {
            for (std::size_t a = 0; a < m.size(); ++a) {
                for (std::size_t b = a + 1; b < m.size(); ++b) {
                    pi[static_cast<std::size_t>(m[a]) * n + m[b]] += 1.0;
                }
            }
        }
    }
    const double inv = 1.0 / archive.sweeps.size();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = pi[static_cast<std::size_t>(i) * n + j] * inv;
            pi[static_cast<std::size_t>(i) * n + j] = v;
            pi[static_cast<std::size_t>(j) * n + i] = v;
        }
        pi[static_cast<std::size_t>(i) * n + i] = 1.0;
    }
    return pi;
}

/// Partition minimizing the Binder loss
///   sum_{i<j} [ loss_ratio * 1(c_i = c_j) (1 - pi_ij) + 1(c_i != c_j) pi_ij ]
/// over the partitions visited by the chain.
inline std::vector<int> binder_partition(const ChainArchive& archive,
                                         double loss_ratio = 1.0) {
    if (archive.sweeps.empty()) throw std::domain_error("binder_partition: empty archive");
    if (!(loss_ratio > 0.0)) throw std::domain_error("binder_partition: loss_ratio > 0");
    const int n = archive.n_data;
    const auto pi = coclustering_matrix(archive);

    double const_term = 0.0;  // sum over pairs of pi_ij
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) const_term += pi[static_cast<std::size_t>(i) * n + j];
    }

    // canonical relabeling so identical partitions dedupe
    auto canonical = [n](const std::vector<int>& alloc) {
        std::vector<int> relabel(n, -1);
        std::vector<int> out(n);
        int next = 0;
        for (int i = 0; i < n; ++i) {
            int& r = relabel[alloc[i]];
            if (r < 0) r = next++;
            out[i] = r;
        }
        return out;
    };

    std::map<std::vector<int>, double> losses;
    const std::vector<int>* best = nullptr;
    double best_loss = std::numeric_limits<double>::infinity();
    for (const auto& s : archive.sweeps) {
        auto key = canonical(s.allocations);
        auto it = losses.find(key);
        if (it == losses.end()) {
            std::vector<std::vector<int>> members(s.k);
            for (int i = 0; i < n; ++i) members[key[i]].push_back(i);
            double loss = const_term;
            for (const auto& m : members) {
                for (std::size_t a = 0; a < m.size(); ++a) {
                    for (std::size_t b = a + 1; b < m.size(); ++b) {
                        const double p = pi[static_cast<std::size_t>(m[a]) * n + m[b]];
                        loss += loss_ratio * (1.0 - p) - p;
                    }
                }
            }
            it = losses.emplace(std::move(key), loss).first;
        }
        if (it->second < best_loss) {
            best_loss = it->second;
            best = &it->first;
        }
    }
    return *best;
}

/// Rand index between two partitions given as label vectors.
inline double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::domain_error("rand_index: label vectors must match and have n >= 2");
    }
    const int n = static_cast<int>(a.size());
    double agree = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa == sb) agree += 1.0;
        }
    }
    return agree / (0.5 * n * (n - 1));
}

/// SSE, SSAE, LPML (harmonic-mean CPO), WAIC with the mean-based and
/// variance-based penalties, plus the K_n posterior and Binder partition.
template <typename Model>
FitReport predictive_indexes(const ChainArchive& archive, const Dataset& data,
                             const Model& model, bool with_binder = true) {
    const std::size_t S = archive.sweeps.size();
    if (S < 2) throw std::domain_error("predictive_indexes: need at least 2 sweeps");
    const int n = data.n();

    std::vector<double> max_log(n, -std::numeric_limits<double>::infinity());
    std::vector<double> acc_plus(n, 0.0);   // for log mean_s f_s
    std::vector<double> max_neg(n, -std::numeric_limits<double>::infinity());
    std::vector<double> acc_neg(n, 0.0);    // for log mean_s 1/f_s
    std::vector<double> sum_log(n, 0.0);
    std::vector<double> mean_log(n, 0.0), m2_log(n, 0.0);  // Welford
    std::vector<double> sum_ey(n, 0.0), sum_ey2(n, 0.0);

    long sweep_count = 0;
    for (const auto& s : archive.sweeps) {
        const auto logw = detail::sweep_log_weights(s);
        ++sweep_count;
        for (int i = 0; i < n; ++i) {
            const double lf = detail::sweep_log_density(s, data, model, i, logw);
            if (lf > max_log[i]) {
                acc_plus[i] = acc_plus[i] * std::exp(max_log[i] - lf) + 1.0;
                max_log[i] = lf;
            } else {
                acc_plus[i] += std::exp(lf - max_log[i]);
            }
            const double nlf = -lf;
            if (nlf > max_neg[i]) {
                acc_neg[i] = acc_neg[i] * std::exp(max_neg[i] - nlf) + 1.0;
                max_neg[i] = nlf;
            } else {
                acc_neg[i] += std::exp(nlf - max_neg[i]);
            }
            sum_log[i] += lf;
            const double delta = lf - mean_log[i];
            mean_log[i] += delta / sweep_count;
            m2_log[i] += delta * (lf - mean_log[i]);

            double ey = 0.0, ey2 = 0.0;
            for (std::size_t j = 0; j < s.jumps.size(); ++j) {
                const double w = std::exp(logw[j]);
                const double mu = model.component_mean(data, i, s.locations[j], s.global);
                const double v = model.component_var(data, i, s.locations[j], s.global);
                ey += w * mu;
                ey2 += w * (v + mu * mu);
            }
            sum_ey[i] += ey;
            sum_ey2[i] += ey2;
        }
    }

    FitReport rep;
    rep.cpo.resize(n);
    double lppd = 0.0, p1 = 0.0, p2 = 0.0;
    const double logS = std::log(static_cast<double>(S));
    for (int i = 0; i < n; ++i) {
        const double log_fbar = max_log[i] + std::log(acc_plus[i]) - logS;
        const double log_cpo = logS - (max_neg[i] + std::log(acc_neg[i]));
        rep.cpo[i] = std::exp(log_cpo);
        if (!std::isfinite(rep.cpo[i]) || rep.cpo[i] <= 0.0) {
            throw std::runtime_error("predictive_indexes: non-finite CPO at datum " +
                                     std::to_string(i));
        }
        rep.lpml += log_cpo;
        lppd += log_fbar;
        p1 += 2.0 * (log_fbar - sum_log[i] / S);
        p2 += m2_log[i] / (S - 1.0);

        const double pred_mean = sum_ey[i] / S;
        const double pred_var = sum_ey2[i] / S - pred_mean * pred_mean;
        const double e = data.y[i] - pred_mean;
        rep.sse += e * e;
        rep.ssae += std::abs(e) / std::sqrt(std::max(pred_var, 1e-300));
    }
    rep.waic1 = -2.0 * (lppd - p1);
    rep.waic2 = -2.0 * (lppd - p2);
    rep.kn_posterior = kn_posterior(archive);
    if (with_binder) rep.binder = binder_partition(archive);
    return rep;
}

struct DensityGrid {
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> lo05;
    std::vector<double> hi95;
};

/// Pointwise posterior mean and 5%/95% quantiles of the random mixture
/// density h(y) = sum_j P_j f(y; tau_j) across kept sweeps. `x` supplies the
/// covariate vector for regression models (empty otherwise).
template <typename Model>
DensityGrid predictive_density_grid(const ChainArchive& archive, const Model& model,
                                    const std::vector<double>& grid,
                                    const std::vector<double>& x = {}) {
    if (archive.sweeps.empty()) {
        throw std::domain_error("predictive_density_grid: empty archive");
    }
    if (grid.empty()) throw std::domain_error("predictive_density_grid: empty grid");
    const std::size_t S = archive.sweeps.size();
    const std::size_t G = grid.size();
    std::vector<std::vector<double>> vals(G, std::vector<double>(S));
    for (std::size_t s = 0; s < S; ++s) {
        const auto& rec = archive.sweeps[s];
        const auto logw = detail::sweep_log_weights(rec);
        for (std::size_t g = 0; g < G; ++g) {
            double dens = 0.0;
            for (std::size_t j = 0; j < rec.jumps.size(); ++j) {
                dens += std::exp(logw[j] +
                                 model.log_kernel_at(grid[g], x, rec.locations[j],
                                                     rec.global));
            }
            vals[g][s] = dens;
        }
    }
    DensityGrid out;
    out.grid = grid;
    out.mean.resize(G);
    out.lo05.resize(G);
    out.hi95.resize(G);
    const std::size_t lo_idx = static_cast<std::size_t>(0.05 * (S - 1));
    const std::size_t hi_idx = static_cast<std::size_t>(0.95 * (S - 1));
    for (std::size_t g = 0; g < G; ++g) {
        double m = 0.0;
        for (double v : vals[g]) m += v;
        out.mean[g] = m / S;
        std::sort(vals[g].begin(), vals[g].end());
        out.lo05[g] = vals[g][lo_idx];
        out.hi95[g] = vals[g][hi_idx];
    }
    return out;
}

}  // namespace normcrm

#endif  // NORMCRM_DIAGNOSTICS_HPP_
