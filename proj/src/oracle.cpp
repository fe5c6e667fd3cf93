#include "mvmatern/oracle.hpp"

#include "mvmatern/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mvmatern {

namespace {

std::vector<Observation> observations(std::span<const double> locations,
                                      std::span<const int> components, int d) {
  if (locations.size() != components.size() * static_cast<std::size_t>(d))
    throw std::invalid_argument("oracle: locations and components disagree in size");
  std::vector<Observation> pts;
  pts.reserve(components.size());
  for (std::size_t i = 0; i < components.size(); ++i)
    pts.push_back({locations.subspan(i * d, d), components[i]});
  return pts;
}

Eigen::LLT<Eigen::MatrixXd> dense_factor(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success || !llt.matrixLLT().diagonal().allFinite()) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "oracle: covariance not positive definite, smallest eigenvalue "
        << eig.eigenvalues().minCoeff();
    throw NotPositiveDefinite(msg.str(), 0);
  }
  return llt;
}

Eigen::MatrixXd dense_covariance(std::span<const Observation> pts,
                                 const StructuralParams& params, std::size_t cap) {
  if (pts.size() > cap)
    throw std::length_error("oracle: " + std::to_string(pts.size()) +
                            " observations exceed the dense cap of " + std::to_string(cap));
  Eigen::MatrixXd sigma;
  CrossCovariance(params).fill(pts, sigma);
  return sigma;
}

}  // namespace

double exact_loglik(const SpatialDataset& data, const StructuralParams& params, std::size_t cap) {
  const auto pts = observations(data.coords(), data.component_index(), data.dim());
  const Eigen::MatrixXd sigma = dense_covariance(pts, params, cap);
  const auto llt = dense_factor(sigma);
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r[i] = data.response(i) - params.mu[data.component(i)];
  const Eigen::VectorXd z = llt.matrixL().solve(r);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * log_det - 0.5 * z.squaredNorm() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<double> simulate(std::span<const double> locations, std::span<const int> components,
                             const StructuralParams& params, std::uint64_t seed,
                             std::size_t cap) {
  const auto pts = observations(locations, components, params.d);
  const auto llt = dense_factor(dense_covariance(pts, params, cap));
  const auto n = static_cast<Eigen::Index>(pts.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  const Eigen::VectorXd y = llt.matrixL() * z;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = params.mu.size() > 0 ? params.mu[components[i]] : 0.0;
    out[i] = mu + y[i];
  }
  return out;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& theta, double step) {
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd t = theta;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    t[k] = theta[k] + step;
    const double up = f(t);
    t[k] = theta[k] - step;
    const double down = f(t);
    t[k] = theta[k];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::domain_error("fd_gradient: non-finite evaluation at coordinate " +
                              std::to_string(k));
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace mvmatern
