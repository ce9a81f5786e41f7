#ifndef NORMCRM_INTENSITY_HPP_
#define NORMCRM_INTENSITY_HPP_

#include <cmath>
#include <stdexcept>
#include <string>

#include "normcrm/quadrature.hpp"
#include "normcrm/specfun.hpp"

namespace normcrm {

enum class IntensityFamily { Gamma, GeneralizedGamma, Bessel };

/// Jump intensity rho(s) of a homogeneous completely random measure.
/// Supported families:
///   Gamma(omega):             rho(s) = s^-1 e^{-omega s}
///   GeneralizedGamma(sigma,omega): rho(s) = s^{-sigma-1} e^{-omega s} / Gamma(1-sigma)
///   Bessel(omega):            rho(s) = s^-1 e^{-omega s} I_0(s),  omega >= 1
/// The generalized-gamma constant 1/Gamma(1-sigma) makes sigma -> 0 coincide
/// with the Gamma family; the total-mass multiplier kappa lives elsewhere.
class Intensity {
public:
    static Intensity gamma_process(double omega) {
        if (!(omega > 0.0)) throw std::domain_error("Intensity: gamma needs omega > 0");
        return Intensity(IntensityFamily::Gamma, omega, 0.0);
    }

    static Intensity generalized_gamma(double sigma, double omega) {
        if (!(omega > 0.0)) throw std::domain_error("Intensity: gen-gamma needs omega > 0");
        if (!(sigma >= 0.0) || sigma >= 1.0) {
            throw std::domain_error("Intensity: gen-gamma needs sigma in [0,1)");
        }
        if (sigma == 0.0) return gamma_process(omega);
        return Intensity(IntensityFamily::GeneralizedGamma, omega, sigma);
    }

    static Intensity bessel(double omega) {
        if (!(omega >= 1.0)) throw std::domain_error("Intensity: bessel needs omega >= 1");
        return Intensity(IntensityFamily::Bessel, omega, 0.0);
    }

    IntensityFamily family() const { return family_; }
    double omega() const { return omega_; }
    double sigma() const { return sigma_; }

    double log_density(double s) const {
        if (!(s > 0.0)) throw std::domain_error("Intensity: log_density needs s > 0");
        switch (family_) {
            case IntensityFamily::Gamma:
                return -std::log(s) - omega_ * s;
            case IntensityFamily::GeneralizedGamma:
                return -(1.0 + sigma_) * std::log(s) - omega_ * s -
                       std::lgamma(1.0 - sigma_);
            case IntensityFamily::Bessel:
                return -std::log(s) - (omega_ - 1.0) * s +
                       std::log(bessel_i_scaled(0.0, s));
        }
        return 0.0;  // unreachable
    }

    double density(double s) const { return std::exp(log_density(s)); }

    std::string name() const {
        switch (family_) {
            case IntensityFamily::Gamma:
                return "gamma";
            case IntensityFamily::GeneralizedGamma:
                return "gengamma";
            case IntensityFamily::Bessel:
                return "bessel";
        }
        return "";
    }

private:
    Intensity(IntensityFamily f, double omega, double sigma)
        : family_(f), omega_(omega), sigma_(sigma) {
        verify_regularity();
    }

    // Numerical check of the regularity conditions:
    // int_0^inf min(1,s) rho(s) ds < inf and int_0^inf rho(s) ds = inf.
    void verify_regularity() const {
        QuadControl ctrl{1e-10, 1e-7, 2000};
        auto rho = [this](double s) { return density(s); };
        auto srho = [this](double s) { return s * density(s); };
        const auto head = integrate_adaptive(srho, 0.0, 1.0, ctrl);
        const auto tail = integrate_semi_infinite(rho, 1.0, ctrl, 1.0 / omega_);
        if (!std::isfinite(head.value) || !std::isfinite(tail.value)) {
            throw std::logic_error("Intensity: min(1,s) rho not integrable");
        }
        const auto mid = integrate_adaptive(rho, 1e-5, 1.0, ctrl);
        const auto wide = integrate_adaptive(rho, 1e-10, 1.0, ctrl);
        if (!(wide.value > 1.5 * mid.value)) {
            throw std::logic_error("Intensity: total mass does not diverge at 0");
        }
    }

    IntensityFamily family_;
    double omega_;
    double sigma_;
};

}  // namespace normcrm

#endif  // NORMCRM_INTENSITY_HPP_
