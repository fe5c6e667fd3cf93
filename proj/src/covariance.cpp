#include "mvmatern/covariance.hpp"

#include "mvmatern/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvmatern {

namespace {

void check_kernel_args(double nu, double alpha) {
  if (!(nu > 0.0)) throw std::domain_error("matern: smoothness must be positive");
  if (!(alpha > 0.0)) throw std::domain_error("matern: range must be positive");
}

double matern_log_norm(double nu) { return (1.0 - nu) * std::numbers::ln2 - log_gamma(nu); }

bool colocated(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

MaternKernel::MaternKernel(double nu, double alpha)
    : nu_(nu), alpha_(alpha) {
  check_kernel_args(nu, alpha);
  log_norm_ = matern_log_norm(nu);
  nu_step_ = std::min(kSmoothnessStep, 0.5 * nu);
  log_norm_up_ = matern_log_norm(nu + nu_step_);
  log_norm_down_ = matern_log_norm(nu - nu_step_);
}

double MaternKernel::value_at(double x, double nu, double log_norm) const {
  return std::min(1.0, std::exp(log_norm + nu * std::log(x) + log_bessel_k_scaled(nu, x) - x));
}

double MaternKernel::value(double h) const {
  if (h == 0.0) return 1.0;
  return value_at(h / alpha_, nu_, log_norm_);
}

MaternKernel::Terms MaternKernel::terms(double h) const {
  if (h == 0.0) return {};
  const double x = h / alpha_;
  const double log_x = std::log(x);
  const LogBesselKPair k = log_bessel_k_scaled_pair(nu_, x);
  Terms t;
  t.value = std::min(1.0, std::exp(log_norm_ + nu_ * log_x + k.log_k_nu - x));
  t.d_alpha = std::exp(log_norm_ + (nu_ + 1.0) * log_x + k.log_k_nu_minus_1 - x) / alpha_;
  t.d_nu = (value_at(x, nu_ + nu_step_, log_norm_up_) -
            value_at(x, nu_ - nu_step_, log_norm_down_)) /
           (2.0 * nu_step_);
  return t;
}

double matern(double h, double nu, double alpha) {
  check_kernel_args(nu, alpha);
  if (h < 0.0) throw std::domain_error("matern: distance must be nonnegative");
  return MaternKernel(nu, alpha).value(h);
}

double matern_dalpha(double h, double nu, double alpha) {
  check_kernel_args(nu, alpha);
  if (h < 0.0) throw std::domain_error("matern: distance must be nonnegative");
  return MaternKernel(nu, alpha).terms(h).d_alpha;
}

double matern_dnu(double h, double nu, double alpha) {
  check_kernel_args(nu, alpha);
  if (h < 0.0) throw std::domain_error("matern: distance must be nonnegative");
  return MaternKernel(nu, alpha).terms(h).d_nu;
}

CrossCovariance::CrossCovariance(const StructuralParams& params)
    : p_(params.p), params_(params), kernels_(static_cast<std::size_t>(pair_type_count(params.p))) {
  for (int i = 0; i < p_; ++i)
    for (int j = 0; j <= i; ++j)
      kernels_[pair_type(i, j, p_)] = MaternKernel(params.nu(i, j), params.alpha(i, j));
}

double CrossCovariance::operator()(const Observation& a, const Observation& b) const {
  const int i = a.component, j = b.component;
  const double h = distance(a.location, b.location);
  const double sig = params_.sigma(i, j);
  double c = sig == 0.0 ? 0.0 : sig * kernels_[pair_type(i, j, p_)].value(h);
  if (h == 0.0 && colocated(a.location, b.location)) c += params_.tau(i, j);
  return c;
}

void CrossCovariance::fill(std::span<const Observation> points, Eigen::MatrixXd& out) const {
  const auto q = static_cast<Eigen::Index>(points.size());
  out.resize(q, q);
  for (Eigen::Index a = 0; a < q; ++a) {
    const int ca = points[a].component;
    out(a, a) = params_.sigma(ca, ca) + params_.tau(ca, ca);
    for (Eigen::Index b = 0; b < a; ++b) out(a, b) = out(b, a) = (*this)(points[a], points[b]);
  }
}

void CrossCovariance::fill_with_derivatives(std::span<const Observation> points,
                                            const Eigen::MatrixXd& jacobian, Eigen::MatrixXd& cov,
                                            std::vector<Eigen::MatrixXd>& dcov) const {
  const auto q = static_cast<Eigen::Index>(points.size());
  const auto n_theta = jacobian.cols();
  const int types = pair_type_count(p_);
  cov.resize(q, q);
  dcov.resize(static_cast<std::size_t>(n_theta));
  for (auto& m : dcov) m.setZero(q, q);

  // Per pair type, the theta coordinates it depends on with their four
  // structural Jacobian entries. Most entries are zero for the constrained
  // families.
  struct Link {
    Eigen::Index k;
    double sigma, alpha, nu, tau;
  };
  std::vector<std::vector<Link>> links(static_cast<std::size_t>(types));
  std::vector<bool> needs_kernel(static_cast<std::size_t>(types), false);
  for (int t = 0; t < types; ++t) {
    for (Eigen::Index k = 0; k < n_theta; ++k) {
      const Link l{k, jacobian(t, k), jacobian(types + t, k), jacobian(2 * types + t, k),
                   jacobian(3 * types + t, k)};
      if (l.sigma != 0.0 || l.alpha != 0.0 || l.nu != 0.0 || l.tau != 0.0) links[t].push_back(l);
      if (l.sigma != 0.0) needs_kernel[t] = true;
    }
  }
  for (int i = 0; i < p_; ++i)
    for (int j = 0; j <= i; ++j)
      if (params_.sigma(i, j) != 0.0) needs_kernel[pair_type(i, j, p_)] = true;

  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const int i = points[a].component, j = points[b].component;
      const int t = pair_type(i, j, p_);
      const double sig = params_.sigma(i, j);
      MaternKernel::Terms m;
      bool same_site = true;
      if (a != b) {
        const double h = distance(points[a].location, points[b].location);
        same_site = h == 0.0 && colocated(points[a].location, points[b].location);
        if (needs_kernel[t]) {
          m = kernels_[t].terms(h);
        } else {
          m.value = 0.0;
        }
      }
      const double nugget = same_site ? 1.0 : 0.0;
      cov(a, b) = cov(b, a) = sig * m.value + nugget * params_.tau(i, j);
      const double d_alpha = sig * m.d_alpha;
      const double d_nu = sig * m.d_nu;
      for (const Link& l : links[t]) {
        const double deriv = l.sigma * m.value + l.alpha * d_alpha + l.nu * d_nu + l.tau * nugget;
        dcov[l.k](a, b) = dcov[l.k](b, a) = deriv;
      }
    }
  }
}

double cross_covariance(const Observation& a, const Observation& b,
                        const StructuralParams& params) {
  const int i = a.component, j = b.component;
  const double h = distance(a.location, b.location);
  double c = params.sigma(i, j) * matern(h, params.nu(i, j), params.alpha(i, j));
  if (h == 0.0 && colocated(a.location, b.location)) c += params.tau(i, j);
  return c;
}

CovarianceBlock build_covariance(std::span<const Observation> points,
                                 const StructuralParams& params) {
  if (points.empty()) throw std::invalid_argument("build_covariance: no points");
  CovarianceBlock block;
  block.points.assign(points.begin(), points.end());
  CrossCovariance(params).fill(points, block.matrix);
  return block;
}

std::vector<Eigen::MatrixXd> build_covariance_derivatives(std::span<const Observation> points,
                                                          Model model,
                                                          const ParameterVector& theta, int p,
                                                          int d) {
  const StructuralParams params = expand(model, theta, p, d);
  const Eigen::MatrixXd jac = structural_jacobian(model, theta, p, d);
  Eigen::MatrixXd cov;
  std::vector<Eigen::MatrixXd> dcov;
  CrossCovariance(params).fill_with_derivatives(points, jac, cov, dcov);
  return dcov;
}

}  // namespace mvmatern
