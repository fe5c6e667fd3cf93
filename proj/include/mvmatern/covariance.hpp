#pragma once

#include "mvmatern/params.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mvmatern {

/// A location in R^d (a view into dataset storage) and a 0-based component.
struct Observation {
  std::span<const double> location;
  int component = 0;
};

struct CovarianceBlock {
  Eigen::MatrixXd matrix;
  std::vector<Observation> points;
};

/// Absolute step used for the central difference in the smoothness.
inline constexpr double kSmoothnessStep = 1e-4;

/// Matérn correlation M(h | nu, alpha) = (h/alpha)^nu K_nu(h/alpha) / (2^(nu-1) G(nu)).
double matern(double h, double nu, double alpha);
/// dM/dalpha from d/dx[x^nu K_nu(x)] = -x^nu K_{nu-1}(x). Zero at h = 0.
double matern_dalpha(double h, double nu, double alpha);
/// dM/dnu by central difference with step min(kSmoothnessStep, nu/2).
double matern_dnu(double h, double nu, double alpha);

double distance(std::span<const double> a, std::span<const double> b);

/// Matérn correlation for one (nu, alpha) with the normalizer cached.
class MaternKernel {
 public:
  struct Terms {
    double value = 1.0;
    double d_alpha = 0.0;
    double d_nu = 0.0;
  };

  MaternKernel() = default;
  MaternKernel(double nu, double alpha);

  double value(double h) const;
  /// Value plus both first derivatives.
  Terms terms(double h) const;

  double nu() const { return nu_; }
  double alpha() const { return alpha_; }

 private:
  double value_at(double x, double nu, double log_norm) const;

  double nu_ = 0.5;
  double alpha_ = 1.0;
  double log_norm_ = 0.0;
  double nu_step_ = kSmoothnessStep;
  double log_norm_up_ = 0.0;
  double log_norm_down_ = 0.0;
};

/// Cross-covariance C_ij(h) + nugget for every pair type of a parameter set.
class CrossCovariance {
 public:
  explicit CrossCovariance(const StructuralParams& params);

  int components() const { return p_; }
  const StructuralParams& params() const { return params_; }

  double operator()(const Observation& a, const Observation& b) const;

  /// Fills the symmetric covariance of `points` into `out` (resized).
  void fill(std::span<const Observation> points, Eigen::MatrixXd& out) const;

  /// Fills the covariance and dSigma/dtheta_k = sum_s (dSigma/ds) J(s, k),
  /// where J is the structural Jacobian (structural_size(p) x n_theta).
  void fill_with_derivatives(std::span<const Observation> points, const Eigen::MatrixXd& jacobian,
                             Eigen::MatrixXd& cov, std::vector<Eigen::MatrixXd>& dcov) const;

 private:
  int p_;
  StructuralParams params_;
  std::vector<MaternKernel> kernels_;  // by pair type
};

/// sigma_ij M(|x_a - x_b| | nu_ij, alpha_ij) + tau_ij 1(x_a = x_b).
double cross_covariance(const Observation& a, const Observation& b,
                        const StructuralParams& params);

CovarianceBlock build_covariance(std::span<const Observation> points,
                                 const StructuralParams& params);

/// dSigma/dtheta_k for every coordinate of theta. Sigma derivatives are
/// analytic in sigma, tau and alpha and central differences in nu; the
/// expansion Jacobian uses central differences on theta.
std::vector<Eigen::MatrixXd> build_covariance_derivatives(std::span<const Observation> points,
                                                          Model model,
                                                          const ParameterVector& theta, int p,
                                                          int d);

}  // namespace mvmatern
