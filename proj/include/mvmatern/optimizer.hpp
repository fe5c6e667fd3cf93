#pragma once

#include "mvmatern/dataset.hpp"
#include "mvmatern/likelihood.hpp"
#include "mvmatern/params.hpp"
#include "mvmatern/vecchia_plan.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace mvmatern {

struct FitConfig {
  int max_iter = 40;
  double stop_tol = 1e-4;
  double eig_ratio_floor = 1e-5;
  double backtrack_factor = 0.5;
  int max_backtracks = 10;
  bool penalties_on = true;
  std::uint64_t seed = 0;
};

enum class StopReason { StepGradTol, MaxIter, GradientStall };

std::string_view to_string(StopReason reason);
StopReason stop_reason_from_string(std::string_view name);

/// Value, gradient and Fisher information of a function to maximize.
struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd fisher;
};

/// Function maximized by scoring(). Either member may throw to signal that
/// theta is outside the usable region.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const Eigen::VectorXd& theta) = 0;
  virtual Evaluation evaluate(const Eigen::VectorXd& theta) = 0;
};

struct ScoringResult {
  Eigen::VectorXd theta;
  Evaluation last;
  std::vector<double> trace;  // value at the start and after each accepted iteration
  int iterations = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::MaxIter;
  double step_dot_grad = 0.0;  // s'g of the last proposed scoring step
};

/// Eigenvalues below floor * lambda_max are raised to floor * lambda_max.
/// Returns the identity when lambda_max <= 0.
Eigen::MatrixXd condition_fisher(const Eigen::MatrixXd& fisher, double floor);

/// Fisher scoring with step halving and a gradient-direction fallback.
/// Trials that throw count as not improving. Throws std::invalid_argument
/// when the objective cannot be evaluated at theta0.
ScoringResult scoring(Objective& objective, const Eigen::VectorXd& theta0,
                      const FitConfig& config);

/// Smooth penalties on marginal parameters: above ln 8 in log nu_ii, below
/// -12 in log(tau_ii / sigma_ii), and above ln(1e6 var_i) in log sigma_ii,
/// each -0.01 times the squared excess.
struct PenaltyTerms {
  double value = 0.0;
  Eigen::VectorXd gradient;  // over theta
  Eigen::MatrixXd fisher;    // Gauss-Newton curvature over theta
};

double penalty_value(const StructuralParams& params, const Eigen::VectorXd& variances);
PenaltyTerms penalties(const StructuralParams& params, const Eigen::VectorXd& variances,
                       const Eigen::MatrixXd& jacobian);

/// Penalized Vecchia loglikelihood over theta.
class VecchiaObjective : public Objective {
 public:
  VecchiaObjective(const SpatialDataset& data, const VecchiaPlan& plan, Model model,
                   bool penalties_on);
  double value(const Eigen::VectorXd& theta) override;
  Evaluation evaluate(const Eigen::VectorXd& theta) override;
  /// Unpenalized bundle from the most recent evaluate().
  const LikelihoodBundle& last_bundle() const { return last_; }

 private:
  const SpatialDataset& data_;
  const VecchiaPlan& plan_;
  Model model_;
  bool penalties_on_;
  Eigen::VectorXd variances_;
  LikelihoodBundle last_;
};

struct FitResult {
  Model model;
  Eigen::VectorXd theta;
  StructuralParams params;  // includes the profiled means
  double loglik = 0.0;
  double penalized_loglik = 0.0;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::MaxIter;
  double step_dot_grad = 0.0;
  double seconds = 0.0;
  Eigen::MatrixXd fisher;  // unpenalized, unconditioned, at theta
  bool start_fallback = false;
};

FitResult fisher_scoring(const SpatialDataset& data, const VecchiaPlan& plan, Model model,
                         const ParameterVector& theta0, const FitConfig& config = {});

struct StartingValues {
  ParameterVector theta;
  MarginalStart marginals;
  std::vector<bool> fallback;  // per component

  bool any_fallback() const;
};

/// Variance and range heuristics for one component.
MarginalStart heuristic_marginals(const SpatialDataset& data);

/// Fits the Independent family one component at a time, reusing the plan's
/// ordering restricted to that component and nearest neighbors with the
/// same m, and seeds every cross coordinate at its neutral value.
StartingValues starting_values(const SpatialDataset& data, Model model, const VecchiaPlan& plan,
                               const FitConfig& config = {});

/// Covariance of the structural vector from the conditioned inverse Fisher
/// information by the delta method.
Eigen::MatrixXd structural_covariance(const FitResult& fit, int d, double floor = 1e-5);

}  // namespace mvmatern
