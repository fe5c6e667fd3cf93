#pragma once

#include "mvmatern/commands.hpp"
#include "mvmatern/covariance.hpp"
#include "mvmatern/dataset.hpp"
#include "mvmatern/likelihood.hpp"
#include "mvmatern/oracle.hpp"
#include "mvmatern/params.hpp"

#include <random>

namespace mvmatern::testing {

inline const Family kAllFamilies[] = {Family::Independent, Family::Parsimonious,
                                      Family::FlexibleA, Family::FlexibleE,
                                      Family::Unconstrained};

// Marginals drawn from a box of reasonable values, cross coordinates
// perturbed around their neutral point.
inline ParameterVector random_theta(Model model, int p, std::mt19937_64& rng,
                                    double spread = 0.5) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, spread);
  MarginalStart m{Eigen::VectorXd(p), Eigen::VectorXd(p), Eigen::VectorXd(p), Eigen::VectorXd(p)};
  for (int i = 0; i < p; ++i) {
    m.sigma[i] = 0.5 + 1.5 * u(rng);
    m.alpha[i] = 0.05 + 0.25 * u(rng);
    m.nu[i] = 0.3 + 1.7 * u(rng);
    m.tau[i] = 0.05 + 0.25 * u(rng);
  }
  ParameterVector theta = theta_from_marginals(model, m);
  const Layout l = layout(model, p);
  for (int k = 0; k < l.size; ++k) theta[k] += z(rng);
  return theta;
}

// n observations at uniform locations in [0,1]^d with uniformly drawn
// components; every component appears and about a third of the
// observations share a site with an earlier one.
inline SpatialDataset random_design(int p, std::size_t n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> coords;
  std::vector<int> comps;
  for (std::size_t i = 0; i < n; ++i) {
    const bool reuse = i > 0 && u(rng) < 0.33;
    const std::size_t src = reuse ? static_cast<std::size_t>(u(rng) * i) : i;
    for (int k = 0; k < d; ++k) coords.push_back(reuse ? coords[src * d + k] : u(rng));
    comps.push_back(i < static_cast<std::size_t>(p) ? static_cast<int>(i)
                                                    : static_cast<int>(u(rng) * p));
  }
  // Drop exact (site, component) repeats by moving them to a fresh site.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (comps[i] == comps[j] &&
          std::equal(coords.begin() + i * d, coords.begin() + (i + 1) * d, coords.begin() + j * d))
        for (int k = 0; k < d; ++k) coords[i * d + k] = u(rng);
  std::vector<double> y(n);
  std::normal_distribution<double> z;
  for (auto& v : y) v = z(rng);
  std::vector<std::string> labels;
  for (int c = 0; c < p; ++c) labels.push_back("c" + std::to_string(c));
  return SpatialDataset::from_indexed(d, std::move(coords), std::move(comps), std::move(y), labels);
}

inline SpatialDataset with_responses(const SpatialDataset& design, std::vector<double> y) {
  return SpatialDataset::from_indexed(design.dim(), design.coords(), design.component_index(),
                                      std::move(y), design.labels());
}

// Draws responses on `design` from params.
inline SpatialDataset simulate_on(const SpatialDataset& design, const StructuralParams& params,
                                  std::uint64_t seed) {
  return with_responses(design,
                        simulate(design.coords(), design.component_index(), params, seed));
}

inline StructuralParams bivariate_truth() {
  StructuralParams t(2, 2);
  t.sigma << 1.0, 0.5, 0.5, 1.5;
  t.alpha.setConstant(0.1);
  t.nu << 0.5, 0.75, 0.75, 1.0;
  t.tau << 0.1, 0.05, 0.05, 0.2;
  t.mu << 1.0, -2.0;
  return t;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace mvmatern::testing
