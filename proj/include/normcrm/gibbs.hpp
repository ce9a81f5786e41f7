#ifndef NORMCRM_GIBBS_HPP_
#define NORMCRM_GIBBS_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "normcrm/archive.hpp"
#include "normcrm/crm.hpp"
#include "normcrm/dataset.hpp"
#include "normcrm/eppf.hpp"
#include "normcrm/intensity.hpp"
#include "normcrm/random.hpp"

namespace normcrm {

struct ChainConfig {
    int n_burnin = 5000;
    int n_samples = 5000;
    int thinning = 10;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_burnin < 0 || n_samples < 1 || thinning < 1) {
            throw std::domain_error("ChainConfig: need burnin >= 0, samples >= 1, thinning >= 1");
        }
    }
};

/// Optional random-threshold step; off by default (the threshold is a fixed
/// configuration constant everywhere else).
struct EpsilonPrior {
    bool enabled = false;
    double eps_min = 1e-8;
    double eps_max = 1e-2;
    std::function<double(double)> log_density;  // defaults to flat on support
};

/// Blocked Gibbs sampler for the truncated normalized-measure mixture. The
/// state keeps allocated atoms (one per occupied cluster) first, the
/// non-allocated atoms after them.
template <typename Model>
class BlockedGibbs {
public:
    BlockedGibbs(const Intensity& in, const TruncationSpec& trunc, const Model& model,
                 const Dataset& data)
        : in_(in), kappa_(trunc.kappa), model_(model), data_(data),
          epsilon_(trunc.epsilon) {
        if (data_.n() < 1) throw std::domain_error("BlockedGibbs: empty dataset");
    }

    // -- state access ---------------------------------------------------------

    double u() const { return u_; }
    int k() const { return k_; }
    int n_nonallocated() const { return static_cast<int>(jumps_.size()) - k_; }
    double epsilon() const { return epsilon_; }
    double total_mass() const {
        double t = 0.0;
        for (double j : jumps_) t += j;
        return t;
    }
    const std::vector<double>& jumps() const { return jumps_; }
    const std::vector<Location>& locations() const { return locations_; }
    const std::vector<int>& allocations() const { return alloc_; }
    const std::vector<int>& cluster_sizes() const { return sizes_; }
    const std::vector<double>& global_params() const { return global_; }
    const JumpSampleStats& jump_stats() const { return jump_stats_; }

    TruncationSpec trunc() const { return TruncationSpec(epsilon_, kappa_); }

    /// Installs an explicit state (tests freeze states this way).
    void set_state(double u, std::vector<double> jumps, std::vector<Location> locations,
                   std::vector<int> alloc, int k) {
        u_ = u;
        jumps_ = std::move(jumps);
        locations_ = std::move(locations);
        alloc_ = std::move(alloc);
        k_ = k;
        rebuild_sizes();
        check_invariants("set_state");
    }

    void set_global(std::vector<double> g) { global_ = std::move(g); }

    // -- initialization -------------------------------------------------------

    /// Overdispersed start: ceil(sqrt(n)) clusters by response quantiles, the
    /// latent u from one prior realization, jumps from their full
    /// conditionals, non-allocated atoms from the prior realization.
    void initialize(Rng& rng) {
        const int n = data_.n();
        global_ = model_.initial_global(rng);
        auto base = [this](Rng& r) { return model_.sample_base(r); };
        const auto prior = sample_prior_realization(in_, trunc(), base, rng, &jump_stats_);
        u_ = n / prior.total_mass;

        const int k0 = std::max(1, static_cast<int>(std::ceil(std::sqrt(double(n)))));
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [this](int a, int b) { return data_.y[a] < data_.y[b]; });
        alloc_.assign(n, 0);
        for (int r = 0; r < n; ++r) {
            alloc_[order[r]] = std::min(k0 - 1, r * k0 / n);
        }
        k_ = k0;
        rebuild_sizes();

        jumps_.assign(k_, 0.0);
        locations_.assign(k_, Location{});
        const auto members = cluster_members();
        for (int c = 0; c < k_; ++c) {
            jumps_[c] = sample_jump(in_, epsilon_, u_, sizes_[c], rng, &jump_stats_);
            locations_[c] =
                model_.sample_allocated(data_, members[c], model_.sample_base(rng),
                                        global_, rng);
        }
        for (std::size_t j = 0; j < prior.atoms(); ++j) {
            jumps_.push_back(prior.jumps[j]);
            locations_.push_back(prior.locations[j]);
        }
        check_invariants("initialize");
    }

    // -- individual full-conditional steps ------------------------------------

    void step_u(Rng& rng) {
        const double t = total_mass();
        if (!(t > 0.0)) throw std::runtime_error("step_u: nonpositive total mass");
        u_ = std::max(draw_gamma(data_.n(), t, rng), 1e-300);
    }

    void step_allocations(Rng& rng) {
        const int n_atoms = static_cast<int>(jumps_.size());
        std::vector<double> logw(n_atoms);
        std::vector<double> logj(n_atoms);
        for (int j = 0; j < n_atoms; ++j) logj[j] = std::log(jumps_[j]);
        for (int i = 0; i < data_.n(); ++i) {
            for (int j = 0; j < n_atoms; ++j) {
                logw[j] = logj[j] + model_.log_kernel(data_, i, locations_[j], global_);
            }
            alloc_[i] = categorical_from_logweights(logw, rng);
        }
        compact_allocated();
        check_invariants("step_allocations");
    }

    void step_n_nonallocated(Rng& rng) {
        const double lam_u = tilted_tail_mass(in_, trunc(), u_);
        long n_na = 0;
        if (draw_uniform(rng) * (lam_u + k_) < lam_u) {
            n_na = 1 + draw_poisson(lam_u, rng);
        } else {
            n_na = draw_poisson(lam_u, rng);
        }
        jumps_.resize(k_);
        locations_.resize(k_);
        for (long j = 0; j < n_na; ++j) {
            jumps_.push_back(sample_jump(in_, epsilon_, u_, 0, rng, &jump_stats_));
            locations_.push_back(model_.sample_base(rng));
        }
        check_invariants("step_n_nonallocated");
    }

    void step_jumps(Rng& rng) {
        for (int c = 0; c < k_; ++c) {
            jumps_[c] = sample_jump(in_, epsilon_, u_, sizes_[c], rng, &jump_stats_);
        }
        for (std::size_t j = k_; j < jumps_.size(); ++j) {
            jumps_[j] = sample_jump(in_, epsilon_, u_, 0, rng, &jump_stats_);
        }
        check_invariants("step_jumps");
    }

    void step_locations(Rng& rng) {
        const auto members = cluster_members();
        for (int c = 0; c < k_; ++c) {
            locations_[c] = model_.sample_allocated(data_, members[c], locations_[c],
                                                    global_, rng);
        }
        for (std::size_t j = k_; j < locations_.size(); ++j) {
            locations_[j] = model_.sample_base(rng);
        }
    }

    void step_global(Rng& rng) {
        if (model_.global_dim() > 0) {
            model_.update_global(data_, alloc_, locations_, global_, rng);
        }
    }

    /// Metropolis update of the truncation threshold with a log-uniform
    /// independence proposal; the target integrates the measure out, so the
    /// atom block must be refreshed right after (run() orders it that way).
    bool step_epsilon(const EpsilonPrior& prior, Rng& rng) {
        if (!prior.enabled) return false;
        if (!(prior.eps_min > 0.0) || !(prior.eps_max > prior.eps_min)) {
            throw std::domain_error("step_epsilon: bad prior support");
        }
        auto logpi = [&prior](double e) {
            return prior.log_density ? prior.log_density(e) : 0.0;
        };
        const Composition comp(sizes_);
        const double le_min = std::log(prior.eps_min);
        const double le_max = std::log(prior.eps_max);
        const double prop = std::exp(le_min + draw_uniform(rng) * (le_max - le_min));
        const double cur = epsilon_;
        const double log_ratio =
            log_eppf_integrand(in_, TruncationSpec(prop, kappa_), comp, u_) +
            logpi(prop) + std::log(prop) -
            log_eppf_integrand(in_, TruncationSpec(cur, kappa_), comp, u_) -
            logpi(cur) - std::log(cur);
        if (std::log(draw_uniform(rng)) < log_ratio) {
            epsilon_ = prop;
            return true;
        }
        return false;
    }

    /// One full sweep in the fixed order
    /// u -> allocations -> [epsilon ->] N_na -> jumps -> locations -> global.
    void sweep(Rng& rng, const EpsilonPrior* eps_prior = nullptr) {
        step_u(rng);
        step_allocations(rng);
        if (eps_prior != nullptr && eps_prior->enabled) step_epsilon(*eps_prior, rng);
        step_n_nonallocated(rng);
        step_jumps(rng);
        step_locations(rng);
        step_global(rng);
        ++iteration_;
    }

    /// Runs burn-in plus thinning * samples sweeps and archives each kept one.
    /// Deterministic given the config seed.
    ChainArchive run(const ChainConfig& cfg, const EpsilonPrior* eps_prior = nullptr) {
        cfg.validate();
        Rng rng(cfg.seed);
        initialize(rng);
        ChainArchive archive;
        archive.n_data = data_.n();
        archive.loc_dim = model_.loc_dim();
        archive.global_dim = model_.global_dim();
        archive.sweeps.reserve(cfg.n_samples);
        const long total = cfg.n_burnin + static_cast<long>(cfg.n_samples) * cfg.thinning;
        for (long it = 0; it < total; ++it) {
            try {
                sweep(rng, eps_prior);
            } catch (const std::exception& e) {
                throw std::runtime_error("gibbs sweep " + std::to_string(it) +
                                         " failed: " + e.what() + " [" +
                                         state_summary() + "]");
            }
            if (it >= cfg.n_burnin && (it - cfg.n_burnin + 1) % cfg.thinning == 0) {
                archive.sweeps.push_back(record());
            }
        }
        return archive;
    }

    SweepRecord record() const {
        SweepRecord s;
        s.iteration = iteration_;
        s.u = u_;
        s.k = k_;
        s.n_na = n_nonallocated();
        s.t_eps = total_mass();
        s.jumps = jumps_;
        s.locations = locations_;
        s.allocations = alloc_;
        s.global = global_;
        return s;
    }

    std::vector<std::vector<int>> cluster_members() const {
        std::vector<std::vector<int>> members(k_);
        for (int i = 0; i < data_.n(); ++i) members[alloc_[i]].push_back(i);
        return members;
    }

    void check_invariants(const char* where) const {
        int total = 0;
        for (int s : sizes_) total += s;
        if (total != data_.n() || static_cast<int>(sizes_.size()) != k_) {
            throw std::logic_error(std::string("gibbs invariant (sizes) broken in ") + where);
        }
        if (jumps_.size() != locations_.size() || static_cast<int>(jumps_.size()) < k_) {
            throw std::logic_error(std::string("gibbs invariant (atoms) broken in ") + where);
        }
        for (double j : jumps_) {
            if (!(j > epsilon_)) {
                throw std::logic_error(std::string("gibbs invariant (jump <= eps) in ") + where);
            }
        }
        for (int c : alloc_) {
            if (c < 0 || c >= k_) {
                throw std::logic_error(std::string("gibbs invariant (alloc range) in ") + where);
            }
        }
    }

private:
    void rebuild_sizes() {
        sizes_.assign(k_, 0);
        for (int c : alloc_) {
            if (c < 0 || c >= k_) throw std::logic_error("alloc index out of range");
            ++sizes_[c];
        }
    }

    // Reorders atoms so occupied ones come first; atoms that lost all members
    // become non-allocated and keep their jump until the block is resampled.
    void compact_allocated() {
        const int n_atoms = static_cast<int>(jumps_.size());
        std::vector<int> usage(n_atoms, 0);
        for (int c : alloc_) ++usage[c];
        std::vector<int> new_index(n_atoms, -1);
        int next = 0;
        for (int j = 0; j < n_atoms; ++j) {
            if (usage[j] > 0) new_index[j] = next++;
        }
        const int new_k = next;
        for (int j = 0; j < n_atoms; ++j) {
            if (usage[j] == 0) new_index[j] = next++;
        }
        std::vector<double> jumps(n_atoms);
        std::vector<Location> locations(n_atoms);
        for (int j = 0; j < n_atoms; ++j) {
            jumps[new_index[j]] = jumps_[j];
            locations[new_index[j]] = std::move(locations_[j]);
        }
        jumps_ = std::move(jumps);
        locations_ = std::move(locations);
        for (int& c : alloc_) c = new_index[c];
        k_ = new_k;
        rebuild_sizes();
    }

    std::string state_summary() const {
        return "k=" + std::to_string(k_) + " u=" + std::to_string(u_) +
               " n_na=" + std::to_string(n_nonallocated()) +
               " T=" + std::to_string(total_mass());
    }

    Intensity in_;
    double kappa_;
    const Model& model_;
    const Dataset& data_;
    double epsilon_;

    double u_ = 1.0;
    std::vector<double> jumps_;
    std::vector<Location> locations_;
    std::vector<int> alloc_;
    std::vector<int> sizes_;
    int k_ = 0;
    std::vector<double> global_;
    long iteration_ = 0;
    JumpSampleStats jump_stats_;
};

}  // namespace normcrm

#endif  // NORMCRM_GIBBS_HPP_
