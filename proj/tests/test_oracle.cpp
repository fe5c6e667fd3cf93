#include "doctest.h"

#include "support.hpp"

#include "mvmatern/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace mvmatern;
using namespace mvmatern::testing;

TEST_CASE("exact_loglik of a single observation") {
  StructuralParams p(1, 2);
  p.sigma(0, 0) = 1.5;
  p.alpha(0, 0) = 0.3;
  p.nu(0, 0) = 0.5;
  p.tau(0, 0) = 0.5;
  p.mu[0] = 1.0;
  const auto data = SpatialDataset::from_indexed(2, {0.2, 0.4}, {0}, {2.5}, {"a"});
  const double var = 2.0, r = 1.5;
  CHECK(exact_loglik(data, p) ==
        doctest::Approx(-0.5 * (std::log(2 * std::numbers::pi * var) + r * r / var)).epsilon(1e-14));
}

TEST_CASE("exact_loglik factorizes for independent components") {
  std::mt19937_64 rng(1);
  const Model model{Family::Independent, false};
  auto params = expand(model, random_theta(model, 2, rng), 2, 2);
  params.mu << 0.5, -1.0;
  const auto data = simulate_on(random_design(2, 70, 2, 2), params, 3);
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    StructuralParams pc(1, 2);
    pc.sigma(0, 0) = params.sigma(c, c);
    pc.alpha(0, 0) = params.alpha(c, c);
    pc.nu(0, 0) = params.nu(c, c);
    pc.tau(0, 0) = params.tau(c, c);
    pc.mu[0] = params.mu[c];
    sum += exact_loglik(data.component_subset(c), pc);
  }
  CHECK(exact_loglik(data, params) == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("exact_loglik errors") {
  const auto data = simulate_on(random_design(2, 30, 2, 3), bivariate_truth(), 1);
  CHECK_THROWS_AS(exact_loglik(data, bivariate_truth(), 10), std::length_error);
  auto bad = bivariate_truth();
  bad.sigma(0, 1) = bad.sigma(1, 0) = 4.0;
  bad.tau.setZero();
  try {
    exact_loglik(data, bad);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(std::string(e.what()).find("eigenvalue") != std::string::npos);
  }
}

TEST_CASE("simulate is deterministic per seed") {
  const auto design = random_design(2, 40, 2, 4);
  const auto a = simulate(design.coords(), design.component_index(), bivariate_truth(), 11);
  const auto b = simulate(design.coords(), design.component_index(), bivariate_truth(), 11);
  const auto c = simulate(design.coords(), design.component_index(), bivariate_truth(), 12);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("nugget-only simulation has the nugget correlation") {
  StructuralParams p(2, 2);
  p.sigma.setZero();
  p.alpha.setConstant(0.1);
  p.nu.setConstant(0.5);
  p.tau << 1.0, 0.6, 0.6, 1.0;
  p.mu.setZero();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  int pairs = 0;
  for (int chunk = 0; chunk < 4; ++chunk) {
    std::vector<double> coords;
    std::vector<int> comps;
    for (int i = 0; i < 500; ++i)
      for (int c = 0; c < 2; ++c) {
        coords.push_back(i);
        coords.push_back(chunk);
        comps.push_back(c);
      }
    const auto y = simulate(coords, comps, p, 100 + chunk);
    for (std::size_t i = 0; i < y.size(); i += 2) {
      sxy += y[i] * y[i + 1];
      sxx += y[i] * y[i];
      syy += y[i + 1] * y[i + 1];
      ++pairs;
    }
  }
  CHECK(pairs == 2000);
  const double r = sxy / std::sqrt(sxx * syy);
  // Sampling sd of r is about (1 - 0.36) / sqrt(2000).
  CHECK(std::abs(r - 0.6) < 4.0 * 0.64 / std::sqrt(2000.0));
}

TEST_CASE("exponential variogram") {
  StructuralParams p(1, 1);
  p.sigma(0, 0) = 2.0;
  p.alpha(0, 0) = 0.5;
  p.nu(0, 0) = 0.5;
  p.tau(0, 0) = 0.0;
  p.mu[0] = 0.0;
  const std::vector<double> x{0.0, 0.2, 0.5, 1.5};
  const std::vector<int> comp(4, 0);
  const int reps = 3000;
  std::vector<double> sq(3, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto y = simulate(x, comp, p, 1000 + r);
    for (int k = 0; k < 3; ++k) sq[k] += (y[k + 1] - y[0]) * (y[k + 1] - y[0]);
  }
  for (int k = 0; k < 3; ++k) {
    const double expected = 2.0 * 2.0 * (1.0 - std::exp(-x[k + 1] / 0.5));
    const double mean = sq[k] / reps;
    // (y1 - y0)^2 is expected * chi^2_1, whose sd is sqrt(2) * expected.
    CHECK(std::abs(mean - expected) < 4.0 * std::sqrt(2.0) * expected / std::sqrt(reps));
  }
}

TEST_CASE("fd_gradient") {
  const Eigen::Vector3d w(1.5, -2.0, 0.25);
  const auto lin = fd_gradient([&](const Eigen::VectorXd& t) { return w.dot(t) + 3.0; },
                               Eigen::Vector3d(0.3, 0.1, -4.0));
  CHECK((lin - w).norm() < 1e-9);
  Eigen::Matrix3d a;
  a << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 3;
  const Eigen::Vector3d t(1.0, -1.0, 2.0);
  const auto quad = fd_gradient([&](const Eigen::VectorXd& v) { return 0.5 * v.dot(a * v); }, t);
  CHECK((quad - a * t).norm() < 1e-8);
  CHECK_THROWS_AS(fd_gradient([](const Eigen::VectorXd& v) { return std::log(v[0]); },
                              Eigen::VectorXd::Constant(1, -1.0)),
                  std::domain_error);
}
