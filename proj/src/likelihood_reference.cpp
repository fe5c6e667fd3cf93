#include "mvmatern/covariance.hpp"
#include "mvmatern/errors.hpp"
#include "mvmatern/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvmatern::reference {

namespace {

struct Block {
  std::vector<Observation> points;  // g(k) then k
  Eigen::VectorXd y;
  std::vector<int> comp;
};

Block gather(const SpatialDataset& data, const VecchiaPlan& plan, std::size_t k) {
  Block b;
  const auto& g = plan.cond_sets[k];
  const auto q = static_cast<Eigen::Index>(g.size() + 1);
  b.y.resize(q);
  for (std::size_t a = 0; a <= g.size(); ++a) {
    const std::size_t obs = plan.permutation[a < g.size() ? g[a] : k];
    b.points.push_back(data.observation(obs));
    b.y[static_cast<Eigen::Index>(a)] = data.response(obs);
    b.comp.push_back(data.component(obs));
  }
  return b;
}

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& m, std::size_t k) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("reference: block not positive definite at position " +
                                  std::to_string(k),
                              k);
  return llt;
}

// Conditional of y_k given y_g(k): y_k - b'y_g has variance v, and its
// mean is (e_{c_k} - sum_a b_a e_{c_a})' mu.
struct Conditional {
  Eigen::VectorXd b;
  double var = 0.0;
  double resid = 0.0;
  Eigen::VectorXd design;
};

Conditional conditional(const Block& blk, const CrossCovariance& cov, std::size_t k) {
  Eigen::MatrixXd s;
  cov.fill(blk.points, s);
  const auto q = s.rows();
  const auto nv = q - 1;
  Conditional c;
  c.design = Eigen::VectorXd::Zero(cov.components());
  c.design[blk.comp[nv]] += 1.0;
  if (nv == 0) {
    c.b.resize(0);
    c.var = s(0, 0);
    c.resid = blk.y[0];
  } else {
    const auto llt = factor(s.topLeftCorner(nv, nv), k);
    c.b = llt.solve(s.col(nv).head(nv));
    c.var = s(nv, nv) - s.col(nv).head(nv).dot(c.b);
    c.resid = blk.y[nv] - c.b.dot(blk.y.head(nv));
    for (Eigen::Index a = 0; a < nv; ++a) c.design[blk.comp[a]] -= c.b[a];
  }
  if (!(c.var > 0.0))
    throw NotPositiveDefinite("reference: nonpositive conditional variance at position " +
                                  std::to_string(k),
                              k);
  return c;
}

// Gaussian log density of r with covariance s, plus its gradient and Fisher
// information with respect to the parameters behind ds.
struct JointTerms {
  double loglik = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd fisher;
};

JointTerms joint_terms(const Eigen::MatrixXd& s, const std::vector<Eigen::MatrixXd>& ds,
                       const Eigen::VectorXd& r, std::size_t k) {
  const auto q = s.rows();
  const auto n_theta = static_cast<Eigen::Index>(ds.size());
  JointTerms t;
  t.grad = Eigen::VectorXd::Zero(n_theta);
  t.fisher = Eigen::MatrixXd::Zero(n_theta, n_theta);
  if (q == 0) return t;
  const auto llt = factor(s, k);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(q, q));
  const Eigen::VectorXd w = inv * r;
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  t.loglik = -0.5 * log_det - 0.5 * r.dot(w) - 0.5 * q * std::log(2.0 * std::numbers::pi);

  std::vector<Eigen::MatrixXd> a(ds.size());
  for (Eigen::Index j = 0; j < n_theta; ++j) {
    a[j] = inv * ds[j].topLeftCorner(q, q);
    t.grad[j] = -0.5 * a[j].trace() + 0.5 * w.dot(ds[j].topLeftCorner(q, q) * w);
  }
  for (Eigen::Index j = 0; j < n_theta; ++j)
    for (Eigen::Index l = 0; l <= j; ++l) {
      const double f = 0.5 * (a[j].array() * a[l].transpose().array()).sum();
      t.fisher(j, l) = f;
      t.fisher(l, j) = f;
    }
  return t;
}

void check(const SpatialDataset& data, const VecchiaPlan& plan, int p) {
  if (plan.permutation.size() != data.size() || plan.cond_sets.size() != data.size())
    throw std::invalid_argument("reference: plan does not match dataset size");
  if (p != data.components())
    throw std::invalid_argument("reference: component count mismatch");
  const auto sizes = data.component_sizes();
  for (std::size_t c = 0; c < sizes.size(); ++c)
    if (sizes[c] == 0)
      throw std::domain_error("reference: component '" + data.labels()[c] +
                              "' has no observations");
}

}  // namespace

Eigen::VectorXd profile_means(const SpatialDataset& data, const VecchiaPlan& plan,
                              const StructuralParams& params) {
  check(data, plan, params.p);
  const CrossCovariance cov(params);
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(params.p, params.p);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(params.p);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto c = conditional(gather(data, plan, k), cov, k);
    xtx += c.design * c.design.transpose() / c.var;
    xty += c.design * c.resid / c.var;
  }
  return xtx.ldlt().solve(xty);
}

double vecchia_loglik_at(const SpatialDataset& data, const VecchiaPlan& plan,
                         const StructuralParams& params) {
  check(data, plan, params.p);
  const CrossCovariance cov(params);
  double total = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto c = conditional(gather(data, plan, k), cov, k);
    const double e = c.resid - c.design.dot(params.mu);
    total += -0.5 * std::log(2.0 * std::numbers::pi * c.var) - 0.5 * e * e / c.var;
  }
  return total;
}

LikelihoodBundle loglik_grad_fisher(const SpatialDataset& data, const VecchiaPlan& plan,
                                    Model model, const ParameterVector& theta) {
  const int p = data.components();
  check(data, plan, p);
  StructuralParams params = expand(model, theta, p, data.dim());
  params.mu = reference::profile_means(data, plan, params);
  const Eigen::MatrixXd jac = structural_jacobian(model, theta, p, data.dim());
  const CrossCovariance cov(params);

  const auto n_theta = theta.size();
  LikelihoodBundle out;
  out.profiled_mu = params.mu;
  out.gradient = Eigen::VectorXd::Zero(n_theta);
  out.fisher = Eigen::MatrixXd::Zero(n_theta, n_theta);
  Eigen::MatrixXd s;
  std::vector<Eigen::MatrixXd> ds;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Block blk = gather(data, plan, k);
    cov.fill_with_derivatives(blk.points, jac, s, ds);
    const auto q = s.rows();
    Eigen::VectorXd r(q);
    for (Eigen::Index a = 0; a < q; ++a) r[a] = blk.y[a] - params.mu[blk.comp[a]];
    const auto joint = joint_terms(s, ds, r, k);
    const auto cond = joint_terms(s.topLeftCorner(q - 1, q - 1), ds, r.head(q - 1), k);
    out.loglik += joint.loglik - cond.loglik;
    out.gradient += joint.grad - cond.grad;
    out.fisher += joint.fisher - cond.fisher;
  }
  return out;
}

}  // namespace mvmatern::reference
