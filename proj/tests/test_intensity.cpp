#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "normcrm/intensity.hpp"

using namespace normcrm;

TEST_CASE("intensity construction validates parameters") {
    CHECK_NOTHROW(Intensity::gamma_process(1.0));
    CHECK_NOTHROW(Intensity::generalized_gamma(0.5, 2.0));
    CHECK_NOTHROW(Intensity::bessel(1.0));
    CHECK_NOTHROW(Intensity::bessel(1000.0));
    CHECK_THROWS_AS(Intensity::gamma_process(0.0), std::domain_error);
    CHECK_THROWS_AS(Intensity::generalized_gamma(1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(Intensity::generalized_gamma(-0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(Intensity::bessel(0.9), std::domain_error);
}

TEST_CASE("generalized gamma with sigma=0 collapses to the gamma process") {
    const auto g = Intensity::generalized_gamma(0.0, 1.7);
    CHECK(g.family() == IntensityFamily::Gamma);
    for (double s : {0.01, 0.5, 3.0}) {
        CHECK(g.log_density(s) ==
              Catch::Approx(Intensity::gamma_process(1.7).log_density(s)).epsilon(1e-15));
    }
}

TEST_CASE("bessel intensity dominates the gamma-process intensity pointwise") {
    const auto bes = Intensity::bessel(1.3);
    const auto gam = Intensity::gamma_process(1.3);
    for (double ls = -12.0; ls <= 5.0; ls += 0.25) {
        const double s = std::exp(ls);
        CHECK(bes.density(s) >= gam.density(s));
    }
}

TEST_CASE("density values match the closed forms") {
    const auto gg = Intensity::generalized_gamma(0.4, 2.0);
    const double s = 0.7;
    CHECK(gg.density(s) ==
          Catch::Approx(std::pow(s, -1.4) * std::exp(-2.0 * s) / std::tgamma(0.6))
              .epsilon(1e-13));
    const auto bes = Intensity::bessel(2.5);
    CHECK(bes.density(s) ==
          Catch::Approx(std::exp(-2.5 * s) * bessel_i(0.0, s) / s).epsilon(1e-13));
}
