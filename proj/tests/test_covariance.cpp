#include "doctest.h"

#include "support.hpp"

#include <cmath>
#include <stdexcept>

using namespace mvmatern;
using namespace mvmatern::testing;

namespace {

Observation at(const std::vector<double>& x, int c) { return {std::span<const double>(x), c}; }

double fd_alpha(double h, double nu, double alpha, double step) {
  return (matern(h, nu, alpha + step) - matern(h, nu, alpha - step)) / (2.0 * step);
}

// Two central differences at steps s and s/2 combined to cancel the s^2 term.
double richardson_alpha(double h, double nu, double alpha, double step) {
  return (4.0 * fd_alpha(h, nu, alpha, step / 2) - fd_alpha(h, nu, alpha, step)) / 3.0;
}

double fd_nu(double h, double nu, double alpha, double step) {
  return (matern(h, nu + step, alpha) - matern(h, nu - step, alpha)) / (2.0 * step);
}

}  // namespace

TEST_CASE("matern closed forms") {
  CHECK(matern(0.0, 2.3, 1.7) == 1.0);
  CHECK(matern(2.0, 0.5, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  CHECK(matern(1.0, 1.5, 1.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-13));
  double worst = 0.0;
  for (double x = 1e-6; x <= 30.0; x *= 1.15) {
    worst = std::max(worst, rel_diff(matern(x * 0.3, 0.5, 0.3), std::exp(-x)));
    worst = std::max(worst, rel_diff(matern(x * 0.3, 1.5, 0.3), (1.0 + x) * std::exp(-x)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("matern domain") {
  CHECK_THROWS_AS(matern(1.0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(matern(1.0, 1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(matern(-1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("matern decreases from one") {
  for (double nu : {0.2, 0.5, 1.3, 4.0, 30.0}) {
    double prev = 1.0;
    for (double h = 0.01; h < 5.0; h *= 1.3) {
      const double v = matern(h, nu, 0.4);
      CHECK(v <= prev);
      CHECK(v > 0.0);
      prev = v;
    }
  }
}

TEST_CASE("matern_dalpha") {
  CHECK(matern_dalpha(0.0, 1.0, 1.0) == 0.0);
  CHECK(matern_dalpha(2.0, 0.5, 2.0) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(rel_diff(matern_dalpha(1.0, 1.2, 0.8), fd_alpha(1.0, 1.2, 0.8, 1e-5)) < 1e-6);
  for (double nu : {0.3, 0.9, 2.5, 12.0, 170.0})
    for (double h : {0.05, 0.5, 2.0}) {
      const double alpha = nu > 100 ? 0.1 : 0.6;
      CHECK(rel_diff(matern_dalpha(h, nu, alpha), richardson_alpha(h, nu, alpha, 1e-3 * alpha)) <
            1e-6);
    }
}

TEST_CASE("matern_dnu") {
  CHECK(matern_dnu(0.0, 1.0, 1.0) == 0.0);
  CHECK(std::abs(matern_dnu(1.0, 1.5, 1.0) - fd_nu(1.0, 1.5, 1.0, 1e-6)) < 1e-5);
  const double d1 = fd_nu(3.0, 0.5, 1.0, 1e-2), d2 = fd_nu(3.0, 0.5, 1.0, 5e-3);
  const double richardson = (4.0 * d2 - d1) / 3.0;
  CHECK(std::abs(matern_dnu(3.0, 0.5, 1.0) - richardson) < 1e-5);
  // Small nu uses a step no larger than nu/2.
  CHECK(std::isfinite(matern_dnu(0.5, 1e-4, 1.0)));
}

TEST_CASE("kernel terms agree with free functions") {
  for (double nu : {0.4, 1.0, 2.2})
    for (double alpha : {0.05, 0.7}) {
      const MaternKernel k(nu, alpha);
      for (double h : {0.0, 0.03, 0.4, 3.0}) {
        const auto t = k.terms(h);
        CHECK(t.value == doctest::Approx(matern(h, nu, alpha)).epsilon(1e-13));
        CHECK(k.value(h) == doctest::Approx(t.value).epsilon(1e-15));
        CHECK(t.d_alpha == doctest::Approx(matern_dalpha(h, nu, alpha)).epsilon(1e-12));
        CHECK(t.d_nu == doctest::Approx(matern_dnu(h, nu, alpha)).epsilon(1e-6));
      }
    }
}

TEST_CASE("cross_covariance examples") {
  StructuralParams p(2, 2);
  p.sigma << 3.0, 0.4, 0.4, 2.0;
  p.alpha << 2.0, 1.0, 1.0, 1.0;
  p.nu << 0.5, 1.0, 1.0, 1.5;
  p.tau << 1.0, 0.2, 0.2, 0.5;
  const std::vector<double> x0{0.0, 0.0}, x1{2.0, 0.0};
  CHECK(cross_covariance(at(x0, 0), at(x0, 0), p) == doctest::Approx(4.0));
  CHECK(cross_covariance(at(x0, 0), at(x0, 1), p) == doctest::Approx(0.6));
  CHECK(cross_covariance(at(x0, 0), at(x1, 0), p) ==
        doctest::Approx(3.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(cross_covariance(at(x0, 0), at(x1, 1), p) == cross_covariance(at(x1, 1), at(x0, 0), p));
}

TEST_CASE("build_covariance") {
  StructuralParams p(1, 2);
  p.sigma(0, 0) = 2.0;
  p.alpha(0, 0) = 0.1;
  p.nu(0, 0) = 1.0;
  p.tau(0, 0) = 0.3;
  const std::vector<double> x0{0.0, 0.0}, x1{50.0, 0.0};
  std::vector<Observation> one{at(x0, 0)};
  CHECK(build_covariance(one, p).matrix(0, 0) == doctest::Approx(2.3));
  std::vector<Observation> far{at(x0, 0), at(x1, 0)};
  CHECK(std::abs(build_covariance(far, p).matrix(0, 1)) < 1e-10 * 2.0);
}

TEST_CASE("random valid params give PD matrices on 30 points") {
  std::mt19937_64 rng(3);
  // Unconstrained expansions are not valid in general.
  for (Family f : {Family::Independent, Family::Parsimonious, Family::FlexibleA,
                   Family::FlexibleE}) {
    const Model model{f, false};
    const auto design = random_design(3, 30, 2, 11);
    std::vector<Observation> pts;
    for (std::size_t i = 0; i < design.size(); ++i) pts.push_back(design.observation(i));
    for (int rep = 0; rep < 20; ++rep) {
      const auto params = expand(model, random_theta(model, 3, rng), 3, 2);
      const auto block = build_covariance(pts, params);
      CHECK((block.matrix - block.matrix.transpose()).norm() == 0.0);
      Eigen::LLT<Eigen::MatrixXd> llt(block.matrix);
      CHECK(llt.info() == Eigen::Success);
    }
  }
}

TEST_CASE("covariance derivatives against finite differences") {
  std::mt19937_64 rng(5);
  const auto design = random_design(2, 12, 2, 9);
  std::vector<Observation> pts;
  for (std::size_t i = 0; i < design.size(); ++i) pts.push_back(design.observation(i));
  for (Family f : kAllFamilies)
    for (bool zero : {false, true}) {
      const Model model{f, zero};
      const auto theta = random_theta(model, 2, rng, 0.3);
      const auto dcov = build_covariance_derivatives(pts, model, theta, 2, 2);
      REQUIRE(dcov.size() == static_cast<std::size_t>(theta.size()));
      for (int k = 0; k < theta.size(); ++k) {
        const double h = 1e-5;
        auto up = theta, down = theta;
        up[k] += h;
        down[k] -= h;
        const Eigen::MatrixXd fd = (build_covariance(pts, expand(model, up, 2, 2)).matrix -
                                    build_covariance(pts, expand(model, down, 2, 2)).matrix) /
                                   (2.0 * h);
        CHECK((dcov[k] - dcov[k].transpose()).norm() == 0.0);
        CHECK((dcov[k] - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
      }
    }
}

TEST_CASE("fill_with_derivatives matches the free function") {
  std::mt19937_64 rng(8);
  const auto design = random_design(3, 15, 2, 4);
  std::vector<Observation> pts;
  for (std::size_t i = 0; i < design.size(); ++i) pts.push_back(design.observation(i));
  for (Family f : kAllFamilies) {
    const Model model{f, false};
    const auto theta = random_theta(model, 3, rng);
    const auto params = expand(model, theta, 3, 2);
    const CrossCovariance cc(params);
    Eigen::MatrixXd cov;
    std::vector<Eigen::MatrixXd> dcov;
    cc.fill_with_derivatives(pts, structural_jacobian(model, theta, 3, 2), cov, dcov);
    CHECK((cov - build_covariance(pts, params).matrix).norm() < 1e-13);
    const auto ref = build_covariance_derivatives(pts, model, theta, 3, 2);
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK((dcov[k] - ref[k]).norm() < 1e-10);
  }
}
