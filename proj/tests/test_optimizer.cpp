#include "doctest.h"

#include "support.hpp"

#include "mvmatern/optimizer.hpp"

#include <cmath>
#include <stdexcept>

using namespace mvmatern;
using namespace mvmatern::testing;

namespace {

// -1/2 (t - c)' A (t - c) with a Fisher information of scale * A.
struct Quadratic : Objective {
  Eigen::MatrixXd a;
  Eigen::VectorXd c;
  double scale = 1.0;
  int evaluations = 0;

  double value(const Eigen::VectorXd& t) override {
    const Eigen::VectorXd r = t - c;
    return -0.5 * r.dot(a * r);
  }
  Evaluation evaluate(const Eigen::VectorXd& t) override {
    ++evaluations;
    return {value(t), -a * (t - c), scale * a};
  }
};

Quadratic toy() {
  Quadratic q;
  q.a.resize(3, 3);
  q.a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  q.c = Eigen::Vector3d(1.0, -2.0, 0.5);
  return q;
}

// Only the starting point can be evaluated.
struct Cliff : Quadratic {
  Eigen::VectorXd start;
  double value(const Eigen::VectorXd& t) override {
    if (t != start) throw std::runtime_error("outside");
    return Quadratic::value(t);
  }
};

}  // namespace

TEST_CASE("quadratic converges in one accepted step") {
  auto q = toy();
  const auto r = scoring(q, Eigen::Vector3d(5.0, 5.0, 5.0), FitConfig{});
  CHECK(r.converged);
  CHECK(r.stop_reason == StopReason::StepGradTol);
  CHECK(r.iterations == 1);
  CHECK(r.step_dot_grad < 1e-4);
  CHECK((r.theta - q.c).norm() < 1e-12);
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[1] > r.trace[0]);
}

TEST_CASE("iteration cap is honored") {
  auto q = toy();
  q.scale = 100.0;  // steps are a hundredth of the Newton step
  const auto r = scoring(q, Eigen::Vector3d(30.0, 30.0, 30.0), FitConfig{});
  CHECK_FALSE(r.converged);
  CHECK(r.stop_reason == StopReason::MaxIter);
  CHECK(r.iterations == 40);
  CHECK(r.trace.size() == 41);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] > r.trace[i - 1]);
  FitConfig short_run;
  short_run.max_iter = 3;
  CHECK(scoring(q, Eigen::Vector3d(30.0, 30.0, 30.0), short_run).iterations == 3);
}

TEST_CASE("no improving step stalls") {
  Cliff q;
  static_cast<Quadratic&>(q) = toy();
  q.start = Eigen::Vector3d(2.0, 2.0, 2.0);
  const auto r = scoring(q, q.start, FitConfig{});
  CHECK_FALSE(r.converged);
  CHECK(r.stop_reason == StopReason::GradientStall);
  CHECK(r.iterations == 0);
  CHECK(r.theta == q.start);
}

TEST_CASE("unusable start") {
  struct Broken : Objective {
    double value(const Eigen::VectorXd&) override { return NAN; }
    Evaluation evaluate(const Eigen::VectorXd& t) override {
      return {NAN, Eigen::VectorXd::Zero(t.size()), Eigen::MatrixXd::Identity(t.size(), t.size())};
    }
  } broken;
  CHECK_THROWS_AS(scoring(broken, Eigen::Vector3d::Zero(), FitConfig{}), std::invalid_argument);
}

TEST_CASE("stop reason names") {
  for (StopReason s : {StopReason::StepGradTol, StopReason::MaxIter, StopReason::GradientStall})
    CHECK(stop_reason_from_string(to_string(s)) == s);
  CHECK(to_string(StopReason::StepGradTol) == "step_grad_tol");
}

TEST_CASE("condition_fisher") {
  CHECK(condition_fisher(Eigen::MatrixXd::Identity(3, 3), 1e-5) == Eigen::MatrixXd::Identity(3, 3));
  const Eigen::MatrixXd d = Eigen::Vector2d(1.0, 1e-9).asDiagonal();
  const Eigen::MatrixXd dc = condition_fisher(d, 1e-5);
  CHECK((dc - Eigen::MatrixXd(Eigen::Vector2d(1.0, 1e-5).asDiagonal())).norm() < 1e-15);
  CHECK(condition_fisher(-Eigen::MatrixXd::Identity(2, 2), 1e-5) == Eigen::MatrixXd::Identity(2, 2));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Eigen::MatrixXd g(5, 5);
  for (int i = 0; i < 25; ++i) g.data()[i] = z(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd spectrum(5);
  spectrum << 10.0, 1.0, 1e-3, 1e-7, -2.0;
  const Eigen::MatrixXd m = q * spectrum.asDiagonal() * q.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(condition_fisher(m, 1e-5));
  Eigen::VectorXd expected(5);
  expected << 1e-4, 1e-4, 1e-3, 1.0, 10.0;
  CHECK((es.eigenvalues() - expected).norm() < 1e-12);
  CHECK(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() <= 1e5 * (1 + 1e-10));
}

TEST_CASE("penalties") {
  StructuralParams p(2, 2);
  p.sigma << 1.0, 0.0, 0.0, 2.0;
  p.alpha.setConstant(0.2);
  p.nu << 1.0, 1.0, 1.0, 1.0;
  p.tau << 0.1, 0.0, 0.0, 0.2;
  const Eigen::Vector2d var(1.0, 2.0);
  CHECK(penalty_value(p, var) == 0.0);
  p.nu(0, 0) = 8.0 * std::exp(1.0);
  CHECK(penalty_value(p, var) == doctest::Approx(-0.01).epsilon(1e-12));
  p.nu(0, 0) = 1.0;
  p.tau(1, 1) = 2.0 * std::exp(-14.0);
  CHECK(penalty_value(p, var) == doctest::Approx(-0.04).epsilon(1e-9));
  p.tau(1, 1) = 0.2;
  p.sigma(0, 0) = 1e6 * std::exp(3.0);
  p.tau(0, 0) = 0.1 * p.sigma(0, 0);
  CHECK(penalty_value(p, var) == doctest::Approx(-0.09).epsilon(1e-9));
}

TEST_CASE("penalty gradient matches finite differences") {
  const Model model{Family::FlexibleE, false};
  MarginalStart m{Eigen::Vector2d(1.0, 3e6), Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(30.0, 1.0),
                  Eigen::Vector2d(1e-7, 0.1)};
  const auto theta = theta_from_marginals(model, m);
  const Eigen::Vector2d var(1.0, 1.0);
  const auto terms = penalties(expand(model, theta, 2, 2), var,
                               structural_jacobian(model, theta, 2, 2));
  CHECK(terms.value < 0.0);
  const auto fd = fd_gradient(
      [&](const Eigen::VectorXd& t) { return penalty_value(expand(model, t, 2, 2), var); }, theta);
  CHECK((terms.gradient - fd).norm() < 1e-6 * std::max(1.0, fd.norm()));
  CHECK((terms.fisher - terms.fisher.transpose()).norm() == 0.0);
}

TEST_CASE("fisher_scoring on simulated data") {
  const auto truth = bivariate_truth();
  const auto data = simulate_on(random_design(2, 200, 2, 31), truth, 4);
  const auto plan = make_plan(data, OrderingScheme::Random, NeighborRule::Any, 10, 1);
  const Model model{Family::Parsimonious, false};
  const auto start = starting_values(data, model, plan);
  CHECK_FALSE(start.any_fallback());
  const auto fit = fisher_scoring(data, plan, model, start.theta);
  CHECK(fit.converged);
  CHECK(fit.step_dot_grad < 1e-4);
  CHECK(fit.loglik >= loglik(data, plan, model, start.theta).loglik);
  CHECK(fit.trace.size() == static_cast<std::size_t>(fit.iterations) + 1);
  CHECK(fit.params.mu.size() == 2);
  CHECK(fit.loglik == doctest::Approx(loglik(data, plan, model, fit.theta).loglik).epsilon(1e-12));
  const auto cov = structural_covariance(fit, 2);
  CHECK(cov.rows() == structural_size(2));
  CHECK(cov.diagonal().minCoeff() >= 0.0);

  FitConfig one;
  one.max_iter = 1;
  const auto short_fit = fisher_scoring(data, plan, model, start.theta, one);
  CHECK(short_fit.iterations == 1);
  CHECK_FALSE(short_fit.converged);
  CHECK_THROWS_AS(fisher_scoring(data, plan, model, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("starting values") {
  const auto truth = bivariate_truth();
  const auto data = simulate_on(random_design(2, 300, 2, 17), truth, 9);
  const auto plan = make_plan(data, OrderingScheme::Random, NeighborRule::Any, 20, 1);
  const Model model{Family::Unconstrained, false};
  const auto start = starting_values(data, model, plan);
  const Layout l = layout(model, 2);
  CHECK(start.theta[l.cross_sigma] == 0.0);
  CHECK(start.theta[l.cross_tau] == 0.0);
  CHECK(start.theta.size() == l.size);

  // Marginal starts versus dense maximum likelihood per component.
  const Model one{Family::Independent, false};
  for (int c = 0; c < 2; ++c) {
    const auto sub = data.component_subset(c);
    MarginalStart m{start.marginals.sigma.segment(c, 1), start.marginals.alpha.segment(c, 1),
                    start.marginals.nu.segment(c, 1), start.marginals.tau.segment(c, 1)};
    const auto full = make_plan(sub, OrderingScheme::Random, NeighborRule::Any,
                                static_cast<int>(sub.size()), 1);
    const auto theta0 = theta_from_marginals(one, m);
    const auto mle = fisher_scoring(sub, full, one, theta0);
    const double at_start = loglik(sub, full, one, theta0).loglik;
    CHECK(mle.loglik - at_start < 5.0);
  }
}

TEST_CASE("heuristic marginals") {
  const auto data = random_design(2, 50, 2, 3);
  const auto h = heuristic_marginals(data);
  for (int c = 0; c < 2; ++c) {
    CHECK(h.sigma[c] == doctest::Approx(data.component_variance(c)));
    CHECK(h.alpha[c] == doctest::Approx(data.bounding_diameter() / 4.0));
    CHECK(h.nu[c] == 0.5);
    CHECK(h.tau[c] == doctest::Approx(0.1 * data.component_variance(c)));
  }
}
