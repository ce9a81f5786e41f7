#ifndef NORMCRM_MODELS_HPP_
#define NORMCRM_MODELS_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "normcrm/crm.hpp"
#include "normcrm/dataset.hpp"
#include "normcrm/random.hpp"

namespace normcrm {

inline double gaussian_log_pdf(double yv, double mean, double var) {
    if (!(var > 0.0)) throw std::domain_error("gaussian_log_pdf: variance must be > 0");
    const double d = yv - mean;
    return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

/// Gaussian kernel with a normal-inverse-gamma base measure:
/// sigma^2 ~ inv-gamma(a, b), mu | sigma^2 ~ N(m0, sigma^2/kappa0).
/// Locations are stored as {mu, sigma^2}.
class GaussNigModel {
public:
    GaussNigModel(double kappa0, double a, double b, double m0)
        : kappa0_(kappa0), a_(a), b_(b), m0_(m0) {
        if (!(kappa0 > 0.0) || !(a > 0.0) || !(b > 0.0)) {
            throw std::domain_error("GaussNigModel: kappa0, a, b must be > 0");
        }
    }

    int loc_dim() const { return 2; }
    int global_dim() const { return 0; }
    double kappa0() const { return kappa0_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double m0() const { return m0_; }

    Location sample_base(Rng& rng) const {
        const double var = draw_inv_gamma(a_, b_, rng);
        const double mu = draw_normal(m0_, std::sqrt(var / kappa0_), rng);
        return {mu, var};
    }

    std::vector<double> initial_global(Rng&) const { return {}; }

    void update_global(const Dataset&, const std::vector<int>&,
                       const std::vector<Location>&, std::vector<double>&, Rng&) const {}

    Location sample_allocated(const Dataset& data, const std::vector<int>& members,
                              const Location&, const std::vector<double>&,
                              Rng& rng) const {
        const int nc = static_cast<int>(members.size());
        if (nc == 0) throw std::logic_error("GaussNigModel: empty cluster update");
        double ybar = 0.0;
        for (int i : members) ybar += data.y[i];
        ybar /= nc;
        double ss = 0.0;
        for (int i : members) ss += (data.y[i] - ybar) * (data.y[i] - ybar);
        const double kn = kappa0_ + nc;
        const double mn = (kappa0_ * m0_ + nc * ybar) / kn;
        const double an = a_ + 0.5 * nc;
        const double bn = b_ + 0.5 * ss +
                          0.5 * kappa0_ * nc * (ybar - m0_) * (ybar - m0_) / kn;
        const double var = draw_inv_gamma(an, bn, rng);
        const double mu = draw_normal(mn, std::sqrt(var / kn), rng);
        return {mu, var};
    }

    double log_kernel(const Dataset& data, int i, const Location& loc,
                      const std::vector<double>&) const {
        return gaussian_log_pdf(data.y[i], loc[0], loc[1]);
    }

    double log_kernel_at(double yv, const std::vector<double>&, const Location& loc,
                         const std::vector<double>&) const {
        return gaussian_log_pdf(yv, loc[0], loc[1]);
    }

    double component_mean(const Dataset&, int, const Location& loc,
                          const std::vector<double>&) const {
        return loc[0];
    }

    double component_var(const Dataset&, int, const Location& loc,
                         const std::vector<double>&) const {
        return loc[1];
    }

private:
    double kappa0_, a_, b_, m0_;
};

enum class VarianceMode { InLocations, Parametric };

/// Gaussian regression kernel y ~ N(x^t theta, eta^2) with intercept-augmented
/// covariates. theta ~ N(b0, Sigma0); eta^2 ~ inv-gamma(nu0/2, nu0 eta0^2 / 2),
/// carried inside each location (default) or as one parametric variance.
class LinDepModel {
public:
    LinDepModel(Eigen::VectorXd b0, Eigen::MatrixXd sigma0, double nu0, double eta0sq,
                VarianceMode mode = VarianceMode::InLocations)
        : b0_(std::move(b0)), sigma0_(std::move(sigma0)), nu0_(nu0), eta0sq_(eta0sq),
          mode_(mode) {
        if (sigma0_.rows() != b0_.size() || sigma0_.cols() != b0_.size()) {
            throw std::domain_error("LinDepModel: Sigma0 shape mismatch");
        }
        if (!(nu0 > 0.0) || !(eta0sq > 0.0)) {
            throw std::domain_error("LinDepModel: nu0 and eta0^2 must be > 0");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(sigma0_);
        if (llt.info() != Eigen::Success) {
            throw std::domain_error("LinDepModel: Sigma0 not positive definite");
        }
        chol_sigma0_ = llt.matrixL();
        sigma0_inv_ = llt.solve(Eigen::MatrixXd::Identity(b0_.size(), b0_.size()));
    }

    int dim_theta() const { return static_cast<int>(b0_.size()); }
    int loc_dim() const {
        return dim_theta() + (mode_ == VarianceMode::InLocations ? 1 : 0);
    }
    int global_dim() const { return mode_ == VarianceMode::Parametric ? 1 : 0; }
    VarianceMode variance_mode() const { return mode_; }

    Location sample_base(Rng& rng) const {
        Eigen::VectorXd z(dim_theta());
        for (int j = 0; j < z.size(); ++j) z[j] = draw_normal(0.0, 1.0, rng);
        const Eigen::VectorXd theta = b0_ + chol_sigma0_ * z;
        Location loc(theta.data(), theta.data() + theta.size());
        if (mode_ == VarianceMode::InLocations) {
            loc.push_back(draw_inv_gamma(0.5 * nu0_, 0.5 * nu0_ * eta0sq_, rng));
        }
        return loc;
    }

    std::vector<double> initial_global(Rng& rng) const {
        if (mode_ != VarianceMode::Parametric) return {};
        return {draw_inv_gamma(0.5 * nu0_, 0.5 * nu0_ * eta0sq_, rng)};
    }

    Location sample_allocated(const Dataset& data, const std::vector<int>& members,
                              const Location& current, const std::vector<double>& global,
                              Rng& rng) const {
        const int d = dim_theta();
        const int nc = static_cast<int>(members.size());
        if (nc == 0) throw std::logic_error("LinDepModel: empty cluster update");
        const double eta2 =
            mode_ == VarianceMode::InLocations ? current.at(d) : global.at(0);
        Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd xty = Eigen::VectorXd::Zero(d);
        for (int i : members) {
            const Eigen::VectorXd xi = design_row(data, i);
            xtx.noalias() += xi * xi.transpose();
            xty.noalias() += xi * data.y[i];
        }
        const Eigen::MatrixXd prec = sigma0_inv_ + xtx / eta2;
        Eigen::LLT<Eigen::MatrixXd> llt(prec);
        const Eigen::VectorXd mean = llt.solve(sigma0_inv_ * b0_ + xty / eta2);
        Eigen::VectorXd z(d);
        for (int j = 0; j < d; ++j) z[j] = draw_normal(0.0, 1.0, rng);
        const Eigen::VectorXd theta =
            mean + llt.matrixU().solve(z);  // cov = prec^-1
        Location loc(theta.data(), theta.data() + theta.size());
        if (mode_ == VarianceMode::InLocations) {
            double ssr = 0.0;
            for (int i : members) {
                const double r = data.y[i] - design_row(data, i).dot(theta);
                ssr += r * r;
            }
            loc.push_back(draw_inv_gamma(0.5 * (nu0_ + nc),
                                         0.5 * (nu0_ * eta0sq_ + ssr), rng));
        }
        return loc;
    }

    void update_global(const Dataset& data, const std::vector<int>& alloc,
                       const std::vector<Location>& locations,
                       std::vector<double>& global, Rng& rng) const {
        if (mode_ != VarianceMode::Parametric) return;
        double ssr = 0.0;
        for (int i = 0; i < data.n(); ++i) {
            const auto& loc = locations[alloc[i]];
            const double r = data.y[i] - mean_at(data, i, loc);
            ssr += r * r;
        }
        global.at(0) = draw_inv_gamma(0.5 * (nu0_ + data.n()),
                                      0.5 * (nu0_ * eta0sq_ + ssr), rng);
    }

    double log_kernel(const Dataset& data, int i, const Location& loc,
                      const std::vector<double>& global) const {
        return gaussian_log_pdf(data.y[i], mean_at(data, i, loc), var_of(loc, global));
    }

    double log_kernel_at(double yv, const std::vector<double>& x, const Location& loc,
                         const std::vector<double>& global) const {
        double mean = loc[0];
        for (std::size_t j = 0; j < x.size(); ++j) mean += loc[j + 1] * x[j];
        return gaussian_log_pdf(yv, mean, var_of(loc, global));
    }

    double component_mean(const Dataset& data, int i, const Location& loc,
                          const std::vector<double>&) const {
        return mean_at(data, i, loc);
    }

    double component_var(const Dataset&, int, const Location& loc,
                         const std::vector<double>& global) const {
        return var_of(loc, global);
    }

private:
    Eigen::VectorXd design_row(const Dataset& data, int i) const {
        Eigen::VectorXd xi(dim_theta());
        xi[0] = 1.0;
        const auto& row = data.x[i];
        if (static_cast<int>(row.size()) + 1 != dim_theta()) {
            throw std::domain_error("LinDepModel: covariate dimension mismatch");
        }
        for (std::size_t j = 0; j < row.size(); ++j) xi[j + 1] = row[j];
        return xi;
    }

    double mean_at(const Dataset& data, int i, const Location& loc) const {
        double mean = loc[0];
        const auto& row = data.x[i];
        for (std::size_t j = 0; j < row.size(); ++j) mean += loc[j + 1] * row[j];
        return mean;
    }

    double var_of(const Location& loc, const std::vector<double>& global) const {
        return mode_ == VarianceMode::InLocations ? loc[dim_theta()] : global.at(0);
    }

    Eigen::VectorXd b0_;
    Eigen::MatrixXd sigma0_;
    Eigen::MatrixXd chol_sigma0_;
    Eigen::MatrixXd sigma0_inv_;
    double nu0_, eta0sq_;
    VarianceMode mode_;
};

}  // namespace normcrm

#endif  // NORMCRM_MODELS_HPP_
