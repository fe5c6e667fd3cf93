#include "doctest.h"

#include "mvmatern/special_fn.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

using namespace mvmatern;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double k_half(double x) { return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x); }

}  // namespace

TEST_CASE("log_gamma at exact values") {
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-14));
  CHECK(std::abs(log_gamma(1.0)) < 1e-15);
  CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-14));
  CHECK(log_gamma(0.5) == doctest::Approx(0.572364943).epsilon(1e-9));
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(log_gamma(-2.5), std::domain_error);
}

TEST_CASE("log_gamma against boost on [1e-3, 1e3]") {
  double worst = 0.0;
  for (double x = 1e-3; x <= 1e3; x *= 1.07)
    worst = std::max(worst, std::abs(log_gamma(x) - boost::math::lgamma(x)));
  CHECK(worst <= 1e-12);
}

TEST_CASE("bessel_k examples") {
  CHECK(rel(bessel_k(0.5, 1.0), 0.461068504) < 1e-9);
  CHECK(rel(bessel_k(1.5, 2.0), std::sqrt(std::numbers::pi / 4.0) * std::exp(-2.0) * 1.5) < 1e-13);
  CHECK(rel(bessel_k(1.5, 2.0), 0.1799066580) < 1e-9);
  CHECK(rel(bessel_k(0.0, 1.0), 0.421024438) < 1e-8);
}

TEST_CASE("bessel_k(0, 1) against quadrature of exp(-x cosh t)") {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double k0 = integrator.integrate([](double t) { return std::exp(-std::cosh(t)); });
  CHECK(rel(bessel_k(0.0, 1.0), k0) < 1e-12);
}

TEST_CASE("bessel_k against boost for nu in [0, 20], x in [1e-8, 50]") {
  double worst = 0.0;
  for (double nu = 0.0; nu <= 20.0; nu += 0.37)
    for (double x = 1e-8; x <= 50.0; x *= 1.9) {
      const double ref = boost::math::cyl_bessel_k(nu, x);
      if (!std::isfinite(ref) || ref > 1e300) continue;
      worst = std::max(worst, rel(bessel_k(nu, x), ref));
    }
  CHECK(worst <= 1e-10);
}

TEST_CASE("half-integer closed forms") {
  double worst = 0.0;
  for (double x = 0.01; x < 40.0; x *= 1.3) {
    const double k12 = k_half(x);
    worst = std::max(worst, rel(bessel_k(0.5, x), k12));
    worst = std::max(worst, rel(bessel_k(1.5, x), k12 * (1.0 + 1.0 / x)));
    worst = std::max(worst, rel(bessel_k(2.5, x), k12 * (1.0 + 3.0 / x + 3.0 / (x * x))));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("symmetry in the order") {
  for (double nu = 0.05; nu < 10.0; nu += 0.41)
    for (double x = 0.01; x < 30.0; x *= 2.3) CHECK(bessel_k(-nu, x) == bessel_k(nu, x));
}

TEST_CASE("three-term recurrence") {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      const double nu = 0.1 + 9.9 * i / 49.0;
      const double x = 0.01 * std::pow(3000.0, j / 49.0);
      const double up = bessel_k_scaled(nu + 1.0, x);
      const double resid =
          up - bessel_k_scaled(nu - 1.0, x) - 2.0 * nu / x * bessel_k_scaled(nu, x);
      worst = std::max(worst, std::abs(resid) / up);
    }
  CHECK(worst <= 1e-8);
}

TEST_CASE("strictly decreasing in x") {
  for (double nu : {0.0, 0.3, 1.0, 2.7, 7.5})
    for (double x = 0.01; x < 30.0; x *= 1.2) CHECK(bessel_k(nu, x * 1.2) < bessel_k(nu, x));
}

TEST_CASE("scaled variant lives past the underflow of K itself") {
  const double x = 800.0;
  CHECK(bessel_k(1.3, x) == 0.0);
  const double scaled = bessel_k_scaled(1.3, x);
  const double asym = std::sqrt(std::numbers::pi / (2.0 * x)) *
                      (1.0 + (4.0 * 1.69 - 1.0) / (8.0 * x));
  CHECK(rel(scaled, asym) < 1e-5);
  CHECK(std::isfinite(log_bessel_k_scaled(1.3, x)));
}

TEST_CASE("overflow saturates to +inf, logs stay finite") {
  CHECK(std::isinf(bessel_k(200.0, 1e-3)));
  const double lk = log_bessel_k_scaled(200.0, 1e-3);
  CHECK(std::isfinite(lk));
  // Leading term: K_nu(x) ~ Gamma(nu)/2 (2/x)^nu.
  const double lead = log_gamma(200.0) - std::log(2.0) + 200.0 * std::log(2.0 / 1e-3) + 1e-3;
  CHECK(lk == doctest::Approx(lead).epsilon(1e-6));
}

TEST_CASE("log pair agrees with boost at large order") {
  for (double nu : {40.3, 120.7, 170.1})
    for (double x : {5.0, 20.0, 80.0}) {
      const auto l = log_bessel_k_scaled_pair(nu, x);
      const double ref = std::log(boost::math::cyl_bessel_k(nu, x)) + x;
      const double ref1 = std::log(boost::math::cyl_bessel_k(nu - 1.0, x)) + x;
      CHECK(std::abs(l.log_k_nu - ref) < 1e-11 * std::abs(ref) + 1e-12);
      CHECK(std::abs(l.log_k_nu_minus_1 - ref1) < 1e-11 * std::abs(ref1) + 1e-12);
    }
}

TEST_CASE("large orders against quadrature of exp(-x cosh t) cosh(nu t)") {
  boost::math::quadrature::tanh_sinh<double> left;
  boost::math::quadrature::exp_sinh<double> right;
  for (double nu : {100.5, 150.3, 400.0, 1829.31})
    for (double x : {0.5, 20.0, 1667.71}) {
      // Integrand of exp(x) K_nu(x), shifted by its log-maximum at sinh t = nu / x.
      const double t_max = std::asinh(nu / x);
      const double g_max = nu * t_max - x * (std::cosh(t_max) - 1.0);
      const auto f = [&](double t) {
        const double g = -x * (std::cosh(t) - 1.0);
        return 0.5 * (std::exp(g + nu * t - g_max) + std::exp(g - nu * t - g_max));
      };
      // Split at the peak so neither rule has to find it.
      const double integral = left.integrate(f, 0.0, t_max) + right.integrate(f, t_max, std::numeric_limits<double>::infinity());
      const double ref = g_max + std::log(integral);
      CHECK(std::abs(log_bessel_k_scaled(nu, x) - ref) < 1e-11 * std::abs(ref));
      CHECK(std::abs(log_bessel_k_scaled_pair(nu, x).log_k_nu - ref) < 1e-11 * std::abs(ref));
    }
}

TEST_CASE("pair matches separate evaluations, including nu < 1/2") {
  for (double nu : {0.0, 0.2, 0.5, 0.7, 1.0, 3.3})
    for (double x : {0.05, 1.0, 2.0, 9.0}) {
      const auto pr = bessel_k_scaled_pair(nu, x);
      CHECK(rel(pr.k_nu, bessel_k_scaled(nu, x)) < 1e-13);
      CHECK(rel(pr.k_nu_minus_1, bessel_k_scaled(nu - 1.0, x)) < 1e-13);
    }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(bessel_k(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k_scaled_pair(-0.5, 1.0), std::domain_error);
}
