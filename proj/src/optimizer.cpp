#include "mvmatern/optimizer.hpp"

#include "mvmatern/errors.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvmatern {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::StepGradTol: return "step_grad_tol";
    case StopReason::MaxIter: return "max_iter";
    case StopReason::GradientStall: return "gradient_stall";
  }
  return "unknown";
}

StopReason stop_reason_from_string(std::string_view name) {
  if (name == "step_grad_tol") return StopReason::StepGradTol;
  if (name == "max_iter") return StopReason::MaxIter;
  if (name == "gradient_stall") return StopReason::GradientStall;
  throw std::invalid_argument("unknown stop reason: " + std::string(name));
}

Eigen::MatrixXd condition_fisher(const Eigen::MatrixXd& fisher, double floor) {
  const auto n = fisher.rows();
  if (n == 0) return fisher;
  const Eigen::MatrixXd sym = 0.5 * (fisher + fisher.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success || !sym.allFinite()) return Eigen::MatrixXd::Identity(n, n);
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmax > 0.0)) return Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd lam = eig.eigenvalues();
  for (auto& v : lam)
    if (v / lmax < floor) v = floor * lmax;
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

namespace {

bool try_value(Objective& obj, const Eigen::VectorXd& theta, double& out) {
  try {
    out = obj.value(theta);
    return std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

ScoringResult scoring(Objective& objective, const Eigen::VectorXd& theta0,
                      const FitConfig& config) {
  ScoringResult res;
  res.theta = theta0;
  try {
    res.last = objective.evaluate(theta0);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("scoring: objective fails at the start: ") + e.what());
  }
  if (!std::isfinite(res.last.value))
    throw std::invalid_argument("scoring: objective is not finite at the start");
  res.trace.push_back(res.last.value);

  for (;;) {
    const Eigen::MatrixXd info = condition_fisher(res.last.fisher, config.eig_ratio_floor);
    const Eigen::VectorXd& g = res.last.gradient;
    const Eigen::VectorXd step = info.ldlt().solve(g);
    res.step_dot_grad = step.dot(g);
    if (res.step_dot_grad < config.stop_tol) {
      res.converged = true;
      res.stop_reason = StopReason::StepGradTol;
      break;
    }
    if (res.iterations >= config.max_iter) {
      res.stop_reason = StopReason::MaxIter;
      break;
    }

    Eigen::VectorXd trial;
    double value = 0.0;
    bool improved = false;
    Eigen::VectorXd s = step;
    for (int t = 0; t <= config.max_backtracks && !improved; ++t) {
      trial = res.theta + s;
      improved = try_value(objective, trial, value) && value > res.last.value;
      s *= config.backtrack_factor;
    }
    if (!improved && g.norm() > 0.0) {
      s = g / g.norm();
      for (int t = 0; t <= config.max_backtracks && !improved; ++t) {
        trial = res.theta + s;
        improved = try_value(objective, trial, value) && value > res.last.value;
        s *= config.backtrack_factor;
      }
    }
    if (!improved) {
      res.stop_reason = StopReason::GradientStall;
      break;
    }

    Evaluation next;
    try {
      next = objective.evaluate(trial);
    } catch (const std::exception&) {
      res.stop_reason = StopReason::GradientStall;
      break;
    }
    res.theta = trial;
    res.last = std::move(next);
    ++res.iterations;
    res.trace.push_back(res.last.value);
  }
  return res;
}

double penalty_value(const StructuralParams& params, const Eigen::VectorXd& variances) {
  constexpr double c = 0.01;
  const double nu_cap = std::log(8.0);
  double total = 0.0;
  for (int i = 0; i < params.p; ++i) {
    const double ln_nu = std::log(params.nu(i, i));
    if (ln_nu > nu_cap) total -= c * (ln_nu - nu_cap) * (ln_nu - nu_cap);
    const double ln_ratio = std::log(params.tau(i, i) / params.sigma(i, i));
    if (ln_ratio < -12.0) total -= c * (ln_ratio + 12.0) * (ln_ratio + 12.0);
    const double sigma_cap = std::log(1e6 * variances[i]);
    const double ln_sigma = std::log(params.sigma(i, i));
    if (ln_sigma > sigma_cap) total -= c * (ln_sigma - sigma_cap) * (ln_sigma - sigma_cap);
  }
  return total;
}

PenaltyTerms penalties(const StructuralParams& params, const Eigen::VectorXd& variances,
                       const Eigen::MatrixXd& jacobian) {
  constexpr double c = 0.01;
  const int p = params.p;
  const auto n_theta = jacobian.cols();
  PenaltyTerms out;
  out.gradient = Eigen::VectorXd::Zero(n_theta);
  out.fisher = Eigen::MatrixXd::Zero(n_theta, n_theta);

  // Each term is -c * e^2 with e the excess of a log quantity q; its
  // theta-gradient is -2 c e dq and its curvature is approximated by 2 c dq dq'.
  auto add = [&](double excess, const Eigen::VectorXd& dq) {
    out.value -= c * excess * excess;
    out.gradient -= 2.0 * c * excess * dq;
    out.fisher += 2.0 * c * dq * dq.transpose();
  };
  auto row = [&](StructuralKind kind, int i) -> Eigen::VectorXd {
    return jacobian.row(structural_index(kind, i, p)).transpose();
  };

  const double nu_cap = std::log(8.0);
  for (int i = 0; i < p; ++i) {
    const double s = params.sigma(i, i), t = params.tau(i, i), n = params.nu(i, i);
    const double ln_nu = std::log(n);
    if (ln_nu > nu_cap) add(ln_nu - nu_cap, row(StructuralKind::Nu, i) / n);
    const double ln_ratio = std::log(t / s);
    if (ln_ratio < -12.0)
      add(ln_ratio + 12.0, row(StructuralKind::Tau, i) / t - row(StructuralKind::Sigma, i) / s);
    const double sigma_cap = std::log(1e6 * variances[i]);
    if (std::log(s) > sigma_cap) add(std::log(s) - sigma_cap, row(StructuralKind::Sigma, i) / s);
  }
  return out;
}

namespace {

Eigen::VectorXd component_variances(const SpatialDataset& data) {
  Eigen::VectorXd v(data.components());
  for (int c = 0; c < data.components(); ++c) v[c] = data.component_variance(c);
  return v;
}

}  // namespace

VecchiaObjective::VecchiaObjective(const SpatialDataset& data, const VecchiaPlan& plan,
                                   Model model, bool penalties_on)
    : data_(data),
      plan_(plan),
      model_(model),
      penalties_on_(penalties_on),
      variances_(component_variances(data)) {}

double VecchiaObjective::value(const Eigen::VectorXd& theta) {
  const auto bundle = loglik(data_, plan_, model_, theta);
  if (!penalties_on_) return bundle.loglik;
  return bundle.loglik +
         penalty_value(expand(model_, theta, data_.components(), data_.dim()), variances_);
}

Evaluation VecchiaObjective::evaluate(const Eigen::VectorXd& theta) {
  last_ = loglik_grad_fisher(data_, plan_, model_, theta);
  Evaluation e{last_.loglik, last_.gradient, last_.fisher};
  if (penalties_on_) {
    const int p = data_.components();
    const auto params = expand(model_, theta, p, data_.dim());
    const auto pen =
        penalties(params, variances_, structural_jacobian(model_, theta, p, data_.dim()));
    e.value += pen.value;
    e.gradient += pen.gradient;
    e.fisher += pen.fisher;
  }
  return e;
}

FitResult fisher_scoring(const SpatialDataset& data, const VecchiaPlan& plan, Model model,
                         const ParameterVector& theta0, const FitConfig& config) {
  const int p = data.components();
  if (theta0.size() != param_count(model, p))
    throw std::invalid_argument("fisher_scoring: theta0 has length " +
                                std::to_string(theta0.size()) + ", model needs " +
                                std::to_string(param_count(model, p)));
  const auto start = std::chrono::steady_clock::now();
  VecchiaObjective objective(data, plan, model, config.penalties_on);
  const ScoringResult sr = scoring(objective, theta0, config);

  FitResult fit;
  fit.model = model;
  fit.theta = sr.theta;
  fit.params = expand(model, sr.theta, p, data.dim());
  fit.params.mu = objective.last_bundle().profiled_mu;
  fit.loglik = objective.last_bundle().loglik;
  fit.penalized_loglik = sr.last.value;
  fit.trace = sr.trace;
  fit.iterations = sr.iterations;
  fit.converged = sr.converged;
  fit.stop_reason = sr.stop_reason;
  fit.step_dot_grad = sr.step_dot_grad;
  fit.fisher = objective.last_bundle().fisher;
  fit.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return fit;
}

bool StartingValues::any_fallback() const {
  for (bool f : fallback)
    if (f) return true;
  return false;
}

MarginalStart heuristic_marginals(const SpatialDataset& data) {
  const int p = data.components();
  MarginalStart m;
  m.sigma.resize(p);
  m.alpha.resize(p);
  m.nu.resize(p);
  m.tau.resize(p);
  double diameter = data.bounding_diameter();
  if (!(diameter > 0.0)) diameter = 1.0;
  for (int c = 0; c < p; ++c) {
    double v = data.component_variance(c);
    if (!(v > 0.0) || !std::isfinite(v)) v = 1.0;
    m.sigma[c] = v;
    m.alpha[c] = diameter / 4.0;
    m.nu[c] = 0.5;
    m.tau[c] = 0.1 * v;
  }
  return m;
}

StartingValues starting_values(const SpatialDataset& data, Model model, const VecchiaPlan& plan,
                               const FitConfig& config) {
  const int p = data.components();
  StartingValues out;
  out.marginals = heuristic_marginals(data);
  out.fallback.assign(static_cast<std::size_t>(p), false);

  // Local index of each observation within its component subset.
  std::vector<std::size_t> local(data.size());
  std::vector<std::size_t> counter(static_cast<std::size_t>(p), 0);
  for (std::size_t i = 0; i < data.size(); ++i) local[i] = counter[data.component(i)]++;

  const Model marginal{Family::Independent, false};
  for (int c = 0; c < p; ++c) {
    const SpatialDataset sub = data.component_subset(c);
    try {
      VecchiaPlan sub_plan;
      for (std::size_t obs : plan.permutation)
        if (data.component(obs) == c) sub_plan.permutation.push_back(local[obs]);
      sub_plan.cond_sets = select_neighbors(sub, sub_plan.permutation, NeighborRule::Any, plan.m);
      sub_plan.m = plan.m;
      sub_plan.ordering = plan.ordering;
      sub_plan.rule = NeighborRule::Any;
      sub_plan.seed = plan.seed;

      const MarginalStart h = heuristic_marginals(sub);
      const FitResult fit =
          fisher_scoring(sub, sub_plan, marginal, theta_from_marginals(marginal, h), config);
      if (!fit.theta.allFinite() || !std::isfinite(fit.loglik))
        throw InvalidParameters("non-finite marginal fit");
      out.marginals.sigma[c] = fit.params.sigma(0, 0);
      out.marginals.alpha[c] = fit.params.alpha(0, 0);
      out.marginals.nu[c] = fit.params.nu(0, 0);
      out.marginals.tau[c] = fit.params.tau(0, 0);
    } catch (const std::exception&) {
      out.fallback[c] = true;
    }
  }
  out.theta = theta_from_marginals(model, out.marginals);
  return out;
}

Eigen::MatrixXd structural_covariance(const FitResult& fit, int d, double floor) {
  const int p = fit.params.p;
  const Eigen::MatrixXd info = condition_fisher(fit.fisher, floor);
  const Eigen::MatrixXd cov_theta =
      info.ldlt().solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  const Eigen::MatrixXd jac = structural_jacobian(fit.model, fit.theta, p, d);
  return jac * cov_theta * jac.transpose();
}

}  // namespace mvmatern
