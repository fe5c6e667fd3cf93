#include "mvmatern/likelihood.hpp"

#include "mvmatern/covariance.hpp"
#include "mvmatern/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mvmatern {

namespace {

constexpr std::size_t kChunk = 64;
constexpr std::size_t kNoFailure = std::numeric_limits<std::size_t>::max();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void check_inputs(const SpatialDataset& data, const VecchiaPlan& plan, int p) {
  if (plan.permutation.size() != data.size() || plan.cond_sets.size() != data.size())
    throw std::invalid_argument("vecchia: plan does not match dataset size");
  if (p != data.components())
    throw std::invalid_argument("vecchia: parameter component count does not match dataset");
  const auto sizes = data.component_sizes();
  for (std::size_t c = 0; c < sizes.size(); ++c)
    if (sizes[c] == 0)
      throw std::domain_error("vecchia: component '" + data.labels()[c] +
                              "' has no observations; its mean is not identified");
}

// Points of block g(k) + {k} with k last, plus responses.
struct BlockScratch {
  std::vector<Observation> points;
  Eigen::VectorXd y;
  Eigen::MatrixXd cov;
  std::vector<Eigen::MatrixXd> dcov;
  Eigen::VectorXd last_row;  // last row of L^{-1}
  Eigen::MatrixXd lhs;

  void gather(const SpatialDataset& data, const VecchiaPlan& plan, std::size_t k) {
    const auto& g = plan.cond_sets[k];
    points.clear();
    y.resize(static_cast<Eigen::Index>(g.size() + 1));
    for (std::size_t a = 0; a < g.size(); ++a) {
      const std::size_t obs = plan.permutation[g[a]];
      points.push_back(data.observation(obs));
      y[static_cast<Eigen::Index>(a)] = data.response(obs);
    }
    const std::size_t obs = plan.permutation[k];
    points.push_back(data.observation(obs));
    y[static_cast<Eigen::Index>(g.size())] = data.response(obs);
  }
};

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  return diag.allFinite() && (diag.array() > 0.0).all();
}

// Sufficient statistics of the mean: each conditional residual is
// c_k - a_k' mu with unit variance after whitening by the last row of L^{-1}.
struct MeanStats {
  double cc = 0.0;
  double log_det = 0.0;  // sum of log L_qq
  Eigen::VectorXd ac;
  Eigen::MatrixXd aa;
  std::size_t failed_at = kNoFailure;

  explicit MeanStats(int p = 0) : ac(Eigen::VectorXd::Zero(p)), aa(Eigen::MatrixXd::Zero(p, p)) {}
  void add(const MeanStats& o) {
    cc += o.cc;
    log_det += o.log_det;
    ac += o.ac;
    aa += o.aa;
  }
  double loglik(const Eigen::VectorXd& mu, std::size_t n) const {
    const double quad = cc - 2.0 * ac.dot(mu) + mu.dot(aa * mu);
    return -0.5 * quad - log_det - static_cast<double>(n) * kHalfLog2Pi;
  }
};

MeanStats mean_stats(const SpatialDataset& data, const VecchiaPlan& plan,
                     const CrossCovariance& cov) {
  const int p = cov.components();
  const std::size_t n = data.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<MeanStats> partial(chunks, MeanStats(p));

#pragma omp parallel
  {
    BlockScratch s;
    Eigen::VectorXd a(p);
#pragma omp for schedule(dynamic, 1)
    for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
      MeanStats& acc = partial[chunk];
      const std::size_t end = std::min(n, (chunk + 1) * kChunk);
      for (std::size_t k = chunk * kChunk; k < end; ++k) {
        s.gather(data, plan, k);
        cov.fill(s.points, s.cov);
        const Eigen::LLT<Eigen::MatrixXd> llt(s.cov);
        if (!factor_ok(llt)) {
          acc.failed_at = k;
          break;
        }
        const auto q = s.cov.rows();
        s.last_row = Eigen::VectorXd::Unit(q, q - 1);
        llt.matrixU().solveInPlace(s.last_row);
        a.setZero();
        for (Eigen::Index b = 0; b < q; ++b) a[s.points[b].component] += s.last_row[b];
        const double c = s.last_row.dot(s.y);
        acc.cc += c * c;
        acc.ac += a * c;
        acc.aa.noalias() += a * a.transpose();
        acc.log_det += std::log(llt.matrixLLT()(q - 1, q - 1));
      }
    }
  }

  MeanStats total(p);
  for (const auto& part : partial) {
    if (part.failed_at != kNoFailure)
      throw NotPositiveDefinite("vecchia: covariance block not positive definite at position " +
                                    std::to_string(part.failed_at),
                                part.failed_at);
    total.add(part);
  }
  if (!std::isfinite(total.cc) || !std::isfinite(total.log_det))
    throw InvalidParameters("vecchia: non-finite likelihood terms");
  return total;
}

Eigen::VectorXd solve_means(const MeanStats& stats) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(stats.aa);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
    throw std::domain_error("vecchia: mean normal equations are singular");
  return ldlt.solve(stats.ac);
}

struct DerivativeAccumulator {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd fisher;
  std::size_t failed_at = kNoFailure;

  explicit DerivativeAccumulator(Eigen::Index n_theta = 0)
      : gradient(Eigen::VectorXd::Zero(n_theta)), fisher(Eigen::MatrixXd::Zero(n_theta, n_theta)) {}
};

}  // namespace

Eigen::VectorXd profile_means(const SpatialDataset& data, const VecchiaPlan& plan,
                              const StructuralParams& params) {
  check_inputs(data, plan, params.p);
  return solve_means(mean_stats(data, plan, CrossCovariance(params)));
}

double vecchia_loglik_at(const SpatialDataset& data, const VecchiaPlan& plan,
                         const StructuralParams& params) {
  check_inputs(data, plan, params.p);
  return mean_stats(data, plan, CrossCovariance(params)).loglik(params.mu, data.size());
}

LikelihoodBundle loglik(const SpatialDataset& data, const VecchiaPlan& plan, Model model,
                        const ParameterVector& theta) {
  const int p = data.components();
  check_inputs(data, plan, p);
  const StructuralParams params = expand(model, theta, p, data.dim());
  const MeanStats stats = mean_stats(data, plan, CrossCovariance(params));
  LikelihoodBundle out;
  out.profiled_mu = solve_means(stats);
  out.loglik = stats.loglik(out.profiled_mu, data.size());
  if (!std::isfinite(out.loglik)) throw InvalidParameters("vecchia: non-finite loglikelihood");
  return out;
}

LikelihoodBundle loglik_grad_fisher(const SpatialDataset& data, const VecchiaPlan& plan,
                                    Model model, const ParameterVector& theta) {
  const int p = data.components();
  check_inputs(data, plan, p);
  const StructuralParams params = expand(model, theta, p, data.dim());
  const Eigen::MatrixXd jac = structural_jacobian(model, theta, p, data.dim());
  const CrossCovariance cov(params);
  const MeanStats stats = mean_stats(data, plan, cov);
  const Eigen::VectorXd mu = solve_means(stats);

  const std::size_t n = data.size();
  const auto n_theta = theta.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<DerivativeAccumulator> partial(chunks, DerivativeAccumulator(n_theta));

#pragma omp parallel
  {
    BlockScratch s;
    Eigen::VectorXd r, z;
#pragma omp for schedule(dynamic, 1)
    for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
      DerivativeAccumulator& acc = partial[chunk];
      const std::size_t end = std::min(n, (chunk + 1) * kChunk);
      for (std::size_t k = chunk * kChunk; k < end; ++k) {
        s.gather(data, plan, k);
        cov.fill_with_derivatives(s.points, jac, s.cov, s.dcov);
        const Eigen::LLT<Eigen::MatrixXd> llt(s.cov);
        if (!factor_ok(llt)) {
          acc.failed_at = k;
          break;
        }
        const auto q = s.cov.rows();
        const auto last = q - 1;
        s.last_row = Eigen::VectorXd::Unit(q, last);
        llt.matrixU().solveInPlace(s.last_row);

        r.resize(q);
        for (Eigen::Index b = 0; b < q; ++b) r[b] = s.y[b] - mu[s.points[b].component];
        z = llt.matrixL().solve(r);
        const double zq = z[last];
        acc.loglik += -0.5 * zq * zq - std::log(llt.matrixLLT()(last, last)) - kHalfLog2Pi;

        // Column j holds the last row of L^{-1} dSigma_j L^{-T}.
        s.lhs.resize(q, n_theta);
        for (Eigen::Index j = 0; j < n_theta; ++j) s.lhs.col(j).noalias() = s.dcov[j] * s.last_row;
        llt.matrixL().solveInPlace(s.lhs);

        const Eigen::VectorXd xz = s.lhs.transpose() * z;
        const Eigen::VectorXd xq = s.lhs.row(last).transpose();
        acc.gradient += -0.5 * xq * (1.0 + zq * zq) + zq * xz;
        acc.fisher.noalias() += s.lhs.transpose() * s.lhs;
        acc.fisher.noalias() -= 0.5 * xq * xq.transpose();
      }
    }
  }

  LikelihoodBundle out;
  out.profiled_mu = mu;
  out.loglik = 0.0;
  out.gradient = Eigen::VectorXd::Zero(n_theta);
  out.fisher = Eigen::MatrixXd::Zero(n_theta, n_theta);
  for (const auto& part : partial) {
    if (part.failed_at != kNoFailure)
      throw NotPositiveDefinite("vecchia: covariance block not positive definite at position " +
                                    std::to_string(part.failed_at),
                                part.failed_at);
    out.loglik += part.loglik;
    out.gradient += part.gradient;
    out.fisher += part.fisher;
  }
  out.fisher = 0.5 * (out.fisher + out.fisher.transpose());
  if (!std::isfinite(out.loglik) || !out.gradient.allFinite() || !out.fisher.allFinite())
    throw InvalidParameters("vecchia: non-finite derivatives");
  return out;
}

}  // namespace mvmatern
