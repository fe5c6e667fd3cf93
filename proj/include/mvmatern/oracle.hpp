#pragma once

#include "mvmatern/covariance.hpp"
#include "mvmatern/dataset.hpp"
#include "mvmatern/params.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mvmatern {

inline constexpr std::size_t kDenseCap = 3000;

/// Exact multivariate normal loglikelihood of the whole dataset with means
/// params.mu. Throws std::length_error above `cap` observations and
/// NotPositiveDefinite (message names the smallest eigenvalue) otherwise.
double exact_loglik(const SpatialDataset& data, const StructuralParams& params,
                    std::size_t cap = kDenseCap);

/// y = mu + L z with Sigma = L L' over the given observations and z seeded
/// standard normals. `locations` is row-major with params.d columns.
std::vector<double> simulate(std::span<const double> locations, std::span<const int> components,
                             const StructuralParams& params, std::uint64_t seed,
                             std::size_t cap = kDenseCap);

/// Central differences per coordinate. Throws std::domain_error when an
/// evaluation is not finite.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& theta, double step = 1e-5);

}  // namespace mvmatern
