#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mvmatern {

enum class Family { Independent, Parsimonious, FlexibleA, FlexibleE, Unconstrained };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

/// A parameterization of the multivariate Matérn plus the cross-nugget switch.
struct Model {
  Family family = Family::Unconstrained;
  bool zero_cross_nugget = false;
};

using ParameterVector = Eigen::VectorXd;

/// Symmetric p x p Matérn parameters plus nugget covariance and means.
struct StructuralParams {
  int p = 0;
  int d = 0;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd alpha;  // ranges, not inverse ranges
  Eigen::MatrixXd nu;
  Eigen::MatrixXd tau;
  Eigen::VectorXd mu;

  StructuralParams() = default;
  StructuralParams(int components, int dim);

  /// sigma_ij / sqrt(sigma_ii sigma_jj)
  double rho(int i, int j) const;
};

// Unordered component pairs i > j are enumerated row by row over the strict
// lower triangle: (1,0), (2,0), (2,1), (3,0), ...
inline int pair_count(int p) { return p * (p - 1) / 2; }
inline int pair_index(int i, int j) {
  if (i < j) std::swap(i, j);
  return i * (i - 1) / 2 + j;
}

// A "pair type" is a diagonal entry (index c) or an off-diagonal pair
// (index p + pair_index). The structural vector stacks sigma, alpha, nu and
// tau over the pair types, giving 2 p (p + 1) entries.
inline int pair_type_count(int p) { return p * (p + 1) / 2; }
inline int pair_type(int i, int j, int p) { return i == j ? i : p + pair_index(i, j); }
inline int structural_size(int p) { return 4 * pair_type_count(p); }

enum class StructuralKind { Sigma = 0, Alpha = 1, Nu = 2, Tau = 3 };
inline int structural_index(StructuralKind kind, int type, int p) {
  return static_cast<int>(kind) * pair_type_count(p) + type;
}

/// Coordinate offsets of theta for one model. Unused blocks have offset -1.
///
/// Layout, in order:
///   log sigma_ii (p) | cross-sigma (V angles, or s_ij links) |
///   log alpha (1 common, p marginal, or p + pairs) | log Delta_B | B angles |
///   log nu (p, or p + pairs) | log Delta_A | A angles | log beta |
///   log tau_ii (p) | cross-nugget (S angles, or t_ij links)
/// Cross blocks follow the pair enumeration above. For p = 2 the A and B
/// angles are dropped (A_12 = B_12 = 0) since they are redundant with the
/// Delta scalars there.
struct Layout {
  int p = 0;
  Model model;
  int log_sigma = -1;
  int cross_sigma = -1;
  int log_alpha = -1;
  int alpha_count = 0;
  int log_delta_b = -1;
  int b_angles = -1;
  int log_nu = -1;
  int nu_count = 0;
  int log_delta_a = -1;
  int a_angles = -1;
  int log_beta = -1;
  int log_tau = -1;
  int cross_tau = -1;
  int size = 0;
};

Layout layout(Model model, int p);

/// Length of theta for the model with p components.
int param_count(Model model, int p);

/// Human-readable coordinate names matching layout().
std::vector<std::string> coordinate_names(Model model, int p);

/// Correlation matrix from pair_count(p) unconstrained values through the
/// spherical parameterization of its Cholesky factor. Angles are
/// pi * logistic(z), or (pi / 2) * logistic(z) when positive_only.
Eigen::MatrixXd corr_from_unconstrained(std::span<const double> z, int p, bool positive_only);

/// Maps theta onto structural parameters satisfying the family's conditions.
/// Means are left at zero. Throws std::invalid_argument on a length mismatch
/// and InvalidParameters when the links overflow.
StructuralParams expand(Model model, const ParameterVector& theta, int p, int d);

/// Parsimonious bound on |rho_ij| for smoothnesses nu_ii, nu_jj in R^d.
double rho_bound(double nu_ii, double nu_jj, int d);

/// Stacked [sigma | alpha | nu | tau] over pair types.
Eigen::VectorXd flatten_structural(const StructuralParams& params);

/// d flatten_structural(expand(theta)) / d theta by central differences.
Eigen::MatrixXd structural_jacobian(Model model, const ParameterVector& theta, int p, int d,
                                    double step = 1e-6);

struct ValidityReport {
  bool alpha_positive = true;
  bool nu_positive = true;
  double max_abs_rho = 0.0;
  double sigma_min_eigenvalue = 0.0;
  double tau_min_eigenvalue = 0.0;
  // Largest absolute deviation from the parsimonious equalities.
  double parsimonious_residual = 0.0;
  // max_ij (|rho_ij| - rho_bound_ij); <= 0 when the bound holds.
  double rho_bound_excess = 0.0;
  // Largest eigenvalue of the doubly-centered matrix; <= 0 means CNSD.
  double alpha_inv2_cnsd_max_eigenvalue = 0.0;
  double nu_cnsd_max_eigenvalue = 0.0;
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
};

ValidityReport validate(const StructuralParams& params, Model model, double tol = 1e-10);

/// Largest eigenvalue of (I - 11'/p) M (I - 11'/p).
double doubly_centered_max_eigenvalue(const Eigen::MatrixXd& m);

/// Marginal values used to seed theta for any family.
struct MarginalStart {
  Eigen::VectorXd sigma;
  Eigen::VectorXd alpha;
  Eigen::VectorXd nu;
  Eigen::VectorXd tau;
};

/// theta with the given marginals and every cross coordinate at the neutral
/// point of its link (zero correlations, small Deltas, beta scaled to the
/// marginal inverse squared ranges).
ParameterVector theta_from_marginals(Model model, const MarginalStart& start);

}  // namespace mvmatern
