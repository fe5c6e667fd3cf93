#pragma once

#include "mvmatern/dataset.hpp"
#include "mvmatern/params.hpp"
#include "mvmatern/vecchia_plan.hpp"

#include <Eigen/Dense>

namespace mvmatern {

/// Vecchia loglikelihood with profiled means, and optionally its gradient
/// and Fisher information over theta.
struct LikelihoodBundle {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd fisher;
  Eigen::VectorXd profiled_mu;
};

/// Generalized least squares means under the Vecchia conditionals. Throws
/// std::domain_error naming a component with no observations.
Eigen::VectorXd profile_means(const SpatialDataset& data, const VecchiaPlan& plan,
                              const StructuralParams& params);

/// Vecchia loglikelihood at the means stored in `params.mu`.
double vecchia_loglik_at(const SpatialDataset& data, const VecchiaPlan& plan,
                         const StructuralParams& params);

/// Profiled loglikelihood; gradient and fisher are left empty. Throws
/// NotPositiveDefinite with the failing position, or InvalidParameters.
LikelihoodBundle loglik(const SpatialDataset& data, const VecchiaPlan& plan, Model model,
                        const ParameterVector& theta);

/// Profiled loglikelihood with gradient and Fisher information.
///
/// Blocks are independent and evaluated in parallel; partial sums are kept
/// per fixed-size chunk and reduced in chunk order, so results do not
/// depend on the thread count.
LikelihoodBundle loglik_grad_fisher(const SpatialDataset& data, const VecchiaPlan& plan,
                                    Model model, const ParameterVector& theta);

namespace reference {

/// Serial evaluation that forms every conditional mean and variance
/// explicitly.
Eigen::VectorXd profile_means(const SpatialDataset& data, const VecchiaPlan& plan,
                              const StructuralParams& params);
double vecchia_loglik_at(const SpatialDataset& data, const VecchiaPlan& plan,
                         const StructuralParams& params);

/// Serial evaluation as a difference of joint Gaussian terms on
/// g(k) + {k} and g(k), with explicit inverses and traces.
LikelihoodBundle loglik_grad_fisher(const SpatialDataset& data, const VecchiaPlan& plan,
                                    Model model, const ParameterVector& theta);

}  // namespace reference

}  // namespace mvmatern
