#include "mvmatern/params.hpp"

#include "mvmatern/errors.hpp"
#include "mvmatern/special_fn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvmatern {

namespace {

double logistic(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

bool has_angle_matrices(int p) { return p > 2; }

double mean_inverse_square(const Eigen::VectorXd& alpha) {
  return (1.0 / alpha.array().square()).mean();
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Independent: return "independent";
    case Family::Parsimonious: return "parsimonious";
    case Family::FlexibleA: return "flexible-a";
    case Family::FlexibleE: return "flexible-e";
    case Family::Unconstrained: return "unconstrained";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::Independent, Family::Parsimonious, Family::FlexibleA,
                   Family::FlexibleE, Family::Unconstrained}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown model family: " + std::string(name));
}

StructuralParams::StructuralParams(int components, int dim)
    : p(components),
      d(dim),
      sigma(Eigen::MatrixXd::Zero(components, components)),
      alpha(Eigen::MatrixXd::Ones(components, components)),
      nu(Eigen::MatrixXd::Constant(components, components, 0.5)),
      tau(Eigen::MatrixXd::Zero(components, components)),
      mu(Eigen::VectorXd::Zero(components)) {}

double StructuralParams::rho(int i, int j) const {
  return sigma(i, j) / std::sqrt(sigma(i, i) * sigma(j, j));
}

Layout layout(Model model, int p) {
  if (p < 1) throw std::domain_error("layout: component count must be at least 1");
  const int pairs = pair_count(p);
  Layout l;
  l.p = p;
  l.model = model;
  int at = 0;
  auto take = [&at](int n) {
    const int offset = at;
    at += n;
    return offset;
  };
  const bool nugget_cross = !model.zero_cross_nugget && pairs > 0;

  l.log_sigma = take(p);
  switch (model.family) {
    case Family::Independent:
      l.log_alpha = take(p);
      l.alpha_count = p;
      l.log_nu = take(p);
      l.nu_count = p;
      l.log_tau = take(p);
      break;
    case Family::Parsimonious:
      if (pairs > 0) l.cross_sigma = take(pairs);
      l.log_alpha = take(1);
      l.alpha_count = 1;
      l.log_nu = take(p);
      l.nu_count = p;
      l.log_tau = take(p);
      if (nugget_cross) l.cross_tau = take(pairs);
      break;
    case Family::FlexibleA:
    case Family::FlexibleE:
      if (pairs > 0) l.cross_sigma = take(pairs);
      l.log_alpha = take(p);
      l.alpha_count = p;
      if (pairs > 0) {
        l.log_delta_b = take(1);
        if (has_angle_matrices(p)) l.b_angles = take(pairs);
      }
      l.log_nu = take(p);
      l.nu_count = p;
      if (pairs > 0) {
        l.log_delta_a = take(1);
        if (has_angle_matrices(p)) l.a_angles = take(pairs);
        if (model.family == Family::FlexibleE) l.log_beta = take(1);
      }
      l.log_tau = take(p);
      if (nugget_cross) l.cross_tau = take(pairs);
      break;
    case Family::Unconstrained:
      if (pairs > 0) l.cross_sigma = take(pairs);
      l.log_alpha = take(p + pairs);
      l.alpha_count = p + pairs;
      l.log_nu = take(p + pairs);
      l.nu_count = p + pairs;
      l.log_tau = take(p);
      if (nugget_cross) l.cross_tau = take(pairs);
      break;
  }
  l.size = at;
  return l;
}

int param_count(Model model, int p) { return layout(model, p).size; }

std::vector<std::string> coordinate_names(Model model, int p) {
  const Layout l = layout(model, p);
  std::vector<std::string> names(l.size);
  auto diag = [](int i) { return std::to_string(i + 1) + std::to_string(i + 1); };
  auto pair = [](int k) {
    int i = 1;
    while ((i + 1) * i / 2 <= k) ++i;
    const int j = k - i * (i - 1) / 2;
    return std::to_string(j + 1) + std::to_string(i + 1);
  };
  const int pairs = pair_count(p);
  const bool angles = model.family != Family::Unconstrained;
  for (int i = 0; i < p; ++i) names[l.log_sigma + i] = "log_sigma_" + diag(i);
  if (l.cross_sigma >= 0)
    for (int k = 0; k < pairs; ++k)
      names[l.cross_sigma + k] = (angles ? "v_angle_" : "s_") + pair(k);
  if (l.alpha_count == 1) {
    names[l.log_alpha] = "log_alpha";
  } else {
    for (int i = 0; i < p; ++i) names[l.log_alpha + i] = "log_alpha_" + diag(i);
    for (int k = 0; k + p < l.alpha_count; ++k) names[l.log_alpha + p + k] = "log_alpha_" + pair(k);
  }
  if (l.log_delta_b >= 0) names[l.log_delta_b] = "log_delta_b";
  if (l.b_angles >= 0)
    for (int k = 0; k < pairs; ++k) names[l.b_angles + k] = "b_angle_" + pair(k);
  for (int i = 0; i < p; ++i) names[l.log_nu + i] = "log_nu_" + diag(i);
  for (int k = 0; k + p < l.nu_count; ++k) names[l.log_nu + p + k] = "log_nu_" + pair(k);
  if (l.log_delta_a >= 0) names[l.log_delta_a] = "log_delta_a";
  if (l.a_angles >= 0)
    for (int k = 0; k < pairs; ++k) names[l.a_angles + k] = "a_angle_" + pair(k);
  if (l.log_beta >= 0) names[l.log_beta] = "log_beta";
  for (int i = 0; i < p; ++i) names[l.log_tau + i] = "log_tau_" + diag(i);
  if (l.cross_tau >= 0)
    for (int k = 0; k < pairs; ++k)
      names[l.cross_tau + k] = (angles ? "s_angle_" : "t_") + pair(k);
  return names;
}

Eigen::MatrixXd corr_from_unconstrained(std::span<const double> z, int p, bool positive_only) {
  if (static_cast<int>(z.size()) != pair_count(p))
    throw std::invalid_argument("corr_from_unconstrained: expected p(p-1)/2 values");
  const double span = positive_only ? 0.5 * std::numbers::pi : std::numbers::pi;
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(p, p);
  chol(0, 0) = 1.0;
  for (int i = 1; i < p; ++i) {
    double sin_prod = 1.0;
    for (int j = 0; j < i; ++j) {
      const double angle = span * logistic(z[pair_index(i, j)]);
      chol(i, j) = std::cos(angle) * sin_prod;
      sin_prod *= std::sin(angle);
    }
    chol(i, i) = sin_prod;
  }
  Eigen::MatrixXd corr = chol * chol.transpose();
  corr.diagonal().setOnes();
  return corr;
}

double rho_bound(double nu_ii, double nu_jj, int d) {
  const double half_d = 0.5 * d;
  const double mean = 0.5 * (nu_ii + nu_jj);
  const double log_bound = 0.5 * (log_gamma(nu_ii + half_d) - log_gamma(nu_ii)) +
                           0.5 * (log_gamma(nu_jj + half_d) - log_gamma(nu_jj)) +
                           log_gamma(mean) - log_gamma(mean + half_d);
  return std::exp(log_bound);
}

StructuralParams expand(Model model, const ParameterVector& theta, int p, int d) {
  const Layout l = layout(model, p);
  if (theta.size() != l.size)
    throw std::invalid_argument("expand: theta has length " + std::to_string(theta.size()) +
                                ", model expects " + std::to_string(l.size));
  if (!theta.allFinite()) throw InvalidParameters("expand: theta has non-finite entries");

  StructuralParams out(p, d);
  const int pairs = pair_count(p);
  auto slice = [&theta](int offset, int n) {
    return std::span<const double>(theta.data() + offset, static_cast<std::size_t>(n));
  };

  for (int i = 0; i < p; ++i) {
    out.sigma(i, i) = std::exp(theta[l.log_sigma + i]);
    out.tau(i, i) = std::exp(theta[l.log_tau + i]);
  }

  // Nugget cross structure.
  if (l.cross_tau >= 0) {
    if (model.family == Family::Unconstrained) {
      for (int i = 1; i < p; ++i)
        for (int j = 0; j < i; ++j) {
          const double t = theta[l.cross_tau + pair_index(i, j)];
          out.tau(i, j) = out.tau(j, i) =
              std::sqrt(out.tau(i, i) * out.tau(j, j)) * (2.0 / std::numbers::pi) * std::atan(t);
        }
    } else {
      const Eigen::MatrixXd s = corr_from_unconstrained(slice(l.cross_tau, pairs), p, false);
      for (int i = 1; i < p; ++i)
        for (int j = 0; j < i; ++j)
          out.tau(i, j) = out.tau(j, i) = std::sqrt(out.tau(i, i) * out.tau(j, j)) * s(i, j);
    }
  }

  switch (model.family) {
    case Family::Independent: {
      for (int i = 0; i < p; ++i) {
        out.alpha(i, i) = std::exp(theta[l.log_alpha + i]);
        out.nu(i, i) = std::exp(theta[l.log_nu + i]);
      }
      // Cross entries only need to be admissible; sigma_ij = 0 removes them.
      for (int i = 1; i < p; ++i)
        for (int j = 0; j < i; ++j) {
          out.alpha(i, j) = out.alpha(j, i) = 0.5 * (out.alpha(i, i) + out.alpha(j, j));
          out.nu(i, j) = out.nu(j, i) = 0.5 * (out.nu(i, i) + out.nu(j, j));
        }
      break;
    }
    case Family::Parsimonious: {
      const double range = std::exp(theta[l.log_alpha]);
      out.alpha.setConstant(range);
      for (int i = 0; i < p; ++i) out.nu(i, i) = std::exp(theta[l.log_nu + i]);
      const Eigen::MatrixXd v =
          pairs > 0 ? corr_from_unconstrained(slice(l.cross_sigma, pairs), p, false)
                    : Eigen::MatrixXd::Identity(p, p);
      for (int i = 1; i < p; ++i)
        for (int j = 0; j < i; ++j) {
          out.nu(i, j) = out.nu(j, i) = 0.5 * (out.nu(i, i) + out.nu(j, j));
          out.sigma(i, j) = out.sigma(j, i) = std::sqrt(out.sigma(i, i) * out.sigma(j, j)) *
                                              v(i, j) * rho_bound(out.nu(i, i), out.nu(j, j), d);
        }
      break;
    }
    case Family::FlexibleA:
    case Family::FlexibleE: {
      for (int i = 0; i < p; ++i) {
        out.alpha(i, i) = std::exp(theta[l.log_alpha + i]);
        out.nu(i, i) = std::exp(theta[l.log_nu + i]);
      }
      if (pairs == 0) break;
      const double delta_b = std::exp(theta[l.log_delta_b]);
      const double delta_a = std::exp(theta[l.log_delta_a]);
      const double beta = l.log_beta >= 0 ? std::exp(theta[l.log_beta]) : 0.0;
      const Eigen::MatrixXd b = l.b_angles >= 0
                                    ? corr_from_unconstrained(slice(l.b_angles, pairs), p, true)
                                    : Eigen::MatrixXd::Identity(p, p);
      const Eigen::MatrixXd a = l.a_angles >= 0
                                    ? corr_from_unconstrained(slice(l.a_angles, pairs), p, true)
                                    : Eigen::MatrixXd::Identity(p, p);
      const Eigen::MatrixXd v = corr_from_unconstrained(slice(l.cross_sigma, pairs), p, false);
      for (int i = 1; i < p; ++i)
        for (int j = 0; j < i; ++j) {
          const double nu_mean = 0.5 * (out.nu(i, i) + out.nu(j, j));
          const double nu_ij = nu_mean + delta_a * (1.0 - a(i, j));
          double inv2 = 0.5 * (1.0 / (out.alpha(i, i) * out.alpha(i, i)) +
                               1.0 / (out.alpha(j, j) * out.alpha(j, j))) +
                        delta_b * (1.0 - b(i, j));
          if (model.family == Family::FlexibleE) inv2 += beta * (nu_ij - nu_mean);
          out.nu(i, j) = out.nu(j, i) = nu_ij;
          out.alpha(i, j) = out.alpha(j, i) = 1.0 / std::sqrt(inv2);
        }
      // log u_ij for every pair type, then sigma_ij from the ratio.
      Eigen::MatrixXd log_u(p, p);
      const double half_d = 0.5 * d;
      for (int i = 0; i < p; ++i)
        for (int j = 0; j <= i; ++j) {
          const double n_ij = out.nu(i, j);
          const double log_a = std::log(out.alpha(i, j));
          double value = 0.0;
          if (model.family == Family::FlexibleA) {
            const double nu_mean = 0.5 * (out.nu(i, i) + out.nu(j, j));
            value = (2.0 * delta_a + out.nu(i, i) + out.nu(j, j)) * log_a + log_gamma(n_ij) +
                    log_gamma(nu_mean + half_d) - log_gamma(n_ij + half_d);
          } else {
            value = 2.0 * n_ij * log_a + n_ij * std::log(beta) + n_ij + log_gamma(n_ij);
          }
          log_u(i, j) = log_u(j, i) = value;
        }
      for (int i = 1; i < p; ++i)
        for (int j = 0; j < i; ++j)
          out.sigma(i, j) = out.sigma(j, i) =
              std::sqrt(out.sigma(i, i) * out.sigma(j, j)) * v(i, j) *
              std::exp(log_u(i, j) - 0.5 * (log_u(i, i) + log_u(j, j)));
      break;
    }
    case Family::Unconstrained: {
      for (int i = 0; i < p; ++i) {
        out.alpha(i, i) = std::exp(theta[l.log_alpha + i]);
        out.nu(i, i) = std::exp(theta[l.log_nu + i]);
      }
      for (int i = 1; i < p; ++i)
        for (int j = 0; j < i; ++j) {
          const int k = pair_index(i, j);
          out.alpha(i, j) = out.alpha(j, i) = std::exp(theta[l.log_alpha + p + k]);
          out.nu(i, j) = out.nu(j, i) = std::exp(theta[l.log_nu + p + k]);
          out.sigma(i, j) = out.sigma(j, i) = std::sqrt(out.sigma(i, i) * out.sigma(j, j)) *
                                              (2.0 / std::numbers::pi) *
                                              std::atan(theta[l.cross_sigma + k]);
        }
      break;
    }
  }

  auto finite_positive = [](const Eigen::MatrixXd& m) {
    return m.allFinite() && (m.array() > 0.0).all();
  };
  if (!out.sigma.allFinite() || !out.tau.allFinite() || !finite_positive(out.alpha) ||
      !finite_positive(out.nu) || (out.sigma.diagonal().array() <= 0.0).any())
    throw InvalidParameters("expand: link functions produced non-finite or nonpositive values");
  return out;
}

Eigen::VectorXd flatten_structural(const StructuralParams& params) {
  const int p = params.p;
  const int types = pair_type_count(p);
  Eigen::VectorXd flat(4 * types);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      const int t = pair_type(i, j, p);
      flat[t] = params.sigma(i, j);
      flat[types + t] = params.alpha(i, j);
      flat[2 * types + t] = params.nu(i, j);
      flat[3 * types + t] = params.tau(i, j);
    }
  return flat;
}

Eigen::MatrixXd structural_jacobian(Model model, const ParameterVector& theta, int p, int d,
                                    double step) {
  const int n = static_cast<int>(theta.size());
  Eigen::MatrixXd jac(structural_size(p), n);
  ParameterVector shifted = theta;
  for (int k = 0; k < n; ++k) {
    shifted[k] = theta[k] + step;
    const Eigen::VectorXd up = flatten_structural(expand(model, shifted, p, d));
    shifted[k] = theta[k] - step;
    const Eigen::VectorXd down = flatten_structural(expand(model, shifted, p, d));
    shifted[k] = theta[k];
    jac.col(k) = (up - down) / (2.0 * step);
  }
  return jac;
}

double doubly_centered_max_eigenvalue(const Eigen::MatrixXd& m) {
  const auto p = m.rows();
  const Eigen::MatrixXd center =
      Eigen::MatrixXd::Identity(p, p) - Eigen::MatrixXd::Constant(p, p, 1.0 / p);
  const Eigen::MatrixXd c = center * m * center;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (c + c.transpose()),
                                                     Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

ValidityReport validate(const StructuralParams& params, Model model, double tol) {
  ValidityReport r;
  const int p = params.p;
  auto min_eigenvalue = [](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
  };
  r.alpha_positive = (params.alpha.array() > 0.0).all();
  r.nu_positive = (params.nu.array() > 0.0).all();
  if (!r.alpha_positive) r.issues.emplace_back("nonpositive range");
  if (!r.nu_positive) r.issues.emplace_back("nonpositive smoothness");
  if ((params.sigma.diagonal().array() <= 0.0).any())
    r.issues.emplace_back("nonpositive marginal variance");
  if ((params.tau.diagonal().array() < 0.0).any())
    r.issues.emplace_back("negative marginal nugget");

  for (int i = 1; i < p; ++i)
    for (int j = 0; j < i; ++j) r.max_abs_rho = std::max(r.max_abs_rho, std::abs(params.rho(i, j)));
  if (r.max_abs_rho > 1.0 + tol) r.issues.emplace_back("|rho| exceeds 1");

  r.sigma_min_eigenvalue = min_eigenvalue(params.sigma);
  r.tau_min_eigenvalue = min_eigenvalue(params.tau);
  if (r.sigma_min_eigenvalue <= 0.0) r.issues.emplace_back("sigma matrix not positive definite");
  if (r.tau_min_eigenvalue < -tol) r.issues.emplace_back("tau matrix not positive semidefinite");

  if (!r.alpha_positive || !r.nu_positive || p < 2) return r;

  if (model.family == Family::Parsimonious) {
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        r.parsimonious_residual =
            std::max(r.parsimonious_residual, std::abs(params.alpha(i, j) - params.alpha(0, 0)));
        r.parsimonious_residual = std::max(
            r.parsimonious_residual,
            std::abs(params.nu(i, j) - 0.5 * (params.nu(i, i) + params.nu(j, j))));
      }
    r.rho_bound_excess = -1.0;
    for (int i = 1; i < p; ++i)
      for (int j = 0; j < i; ++j)
        r.rho_bound_excess =
            std::max(r.rho_bound_excess, std::abs(params.rho(i, j)) -
                                             rho_bound(params.nu(i, i), params.nu(j, j), params.d));
    if (r.parsimonious_residual > tol) r.issues.emplace_back("parsimonious equalities violated");
    if (r.rho_bound_excess > tol) r.issues.emplace_back("parsimonious correlation bound violated");
  }

  const Eigen::MatrixXd inv2 = (1.0 / params.alpha.array().square()).matrix();
  r.alpha_inv2_cnsd_max_eigenvalue = doubly_centered_max_eigenvalue(inv2);
  r.nu_cnsd_max_eigenvalue = doubly_centered_max_eigenvalue(params.nu);
  if (model.family == Family::FlexibleA || model.family == Family::FlexibleE) {
    if (r.alpha_inv2_cnsd_max_eigenvalue > tol)
      r.issues.emplace_back("inverse squared ranges not conditionally negative semidefinite");
  }
  if (model.family == Family::FlexibleA || model.family == Family::FlexibleE) {
    if (r.nu_cnsd_max_eigenvalue > tol)
      r.issues.emplace_back("smoothness matrix not conditionally negative semidefinite");
  }
  return r;
}

ParameterVector theta_from_marginals(Model model, const MarginalStart& start) {
  const int p = static_cast<int>(start.sigma.size());
  const Layout l = layout(model, p);
  ParameterVector theta = ParameterVector::Zero(l.size);
  for (int i = 0; i < p; ++i) {
    theta[l.log_sigma + i] = std::log(start.sigma[i]);
    theta[l.log_tau + i] = std::log(start.tau[i]);
    theta[l.log_nu + i] = std::log(start.nu[i]);
  }
  if (l.alpha_count == 1) {
    theta[l.log_alpha] = start.alpha.array().log().mean();
  } else {
    for (int i = 0; i < p; ++i) theta[l.log_alpha + i] = std::log(start.alpha[i]);
  }
  if (model.family == Family::Unconstrained) {
    for (int i = 1; i < p; ++i)
      for (int j = 0; j < i; ++j) {
        const int k = pair_index(i, j);
        theta[l.log_alpha + p + k] = 0.5 * (std::log(start.alpha[i]) + std::log(start.alpha[j]));
        theta[l.log_nu + p + k] = std::log(0.5 * (start.nu[i] + start.nu[j]));
      }
  }
  const double scale = mean_inverse_square(start.alpha);
  if (l.log_delta_b >= 0) theta[l.log_delta_b] = std::log(0.01 * scale);
  if (l.log_delta_a >= 0) theta[l.log_delta_a] = std::log(0.01);
  if (l.log_beta >= 0) theta[l.log_beta] = std::log(scale);
  return theta;
}

}  // namespace mvmatern
