#include "mvmatern/serialize.hpp"

#include <stdexcept>

namespace mvmatern {

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != cols)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

json to_json(Model model) {
  return {{"family", std::string(to_string(model.family))},
          {"zero_cross_nugget", model.zero_cross_nugget}};
}

Model model_from_json(const json& j) {
  Model m;
  m.family = family_from_string(j.at("family").get<std::string>());
  m.zero_cross_nugget = j.value("zero_cross_nugget", false);
  return m;
}

json to_json(const StructuralParams& params) {
  json j;
  j["sigma"] = to_json(params.sigma);
  j["alpha"] = to_json(params.alpha);
  j["nu"] = to_json(params.nu);
  j["tau"] = to_json(params.tau);
  j["mu"] = to_json(params.mu);
  return j;
}

StructuralParams params_from_json(const json& j, int d) {
  const auto sigma = matrix_from_json(j.at("sigma"));
  const int p = static_cast<int>(sigma.rows());
  StructuralParams params(p, d);
  params.sigma = sigma;
  params.alpha = matrix_from_json(j.at("alpha"));
  params.nu = matrix_from_json(j.at("nu"));
  params.tau = matrix_from_json(j.at("tau"));
  if (j.contains("mu")) params.mu = vector_from_json(j.at("mu"));
  for (const Eigen::MatrixXd* m : {&params.sigma, &params.alpha, &params.nu, &params.tau})
    if (m->rows() != p || m->cols() != p)
      throw std::invalid_argument("params_from_json: matrices must all be p x p");
  if (params.mu.size() != p) throw std::invalid_argument("params_from_json: mu must have length p");
  return params;
}

json to_json(const VecchiaPlan& plan) {
  json j;
  j["permutation"] = plan.permutation;
  j["cond_sets"] = plan.cond_sets;
  j["m"] = plan.m;
  j["ordering"] = std::string(to_string(plan.ordering));
  j["neighbors"] = std::string(to_string(plan.rule));
  j["seed"] = plan.seed;
  return j;
}

VecchiaPlan plan_from_json(const json& j) {
  VecchiaPlan plan;
  plan.permutation = j.at("permutation").get<std::vector<std::size_t>>();
  plan.cond_sets = j.at("cond_sets").get<std::vector<std::vector<std::size_t>>>();
  plan.m = j.value("m", 0);
  plan.ordering = ordering_from_string(j.value("ordering", std::string("random")));
  plan.rule = neighbor_rule_from_string(j.value("neighbors", std::string("any")));
  plan.seed = j.value("seed", std::uint64_t{0});
  return plan;
}

json to_json(const FitConfig& config) {
  return {{"max_iter", config.max_iter},
          {"stop_tol", config.stop_tol},
          {"eig_ratio_floor", config.eig_ratio_floor},
          {"backtrack_factor", config.backtrack_factor},
          {"max_backtracks", config.max_backtracks},
          {"penalties_on", config.penalties_on},
          {"seed", config.seed}};
}

json to_json(const FitResult& fit, const FitConfig* config) {
  json j = to_json(fit.params);
  j["model"] = to_json(fit.model);
  j["theta"] = to_json(fit.theta);
  j["coordinates"] = coordinate_names(fit.model, fit.params.p);
  j["loglik"] = fit.loglik;
  j["penalized_loglik"] = fit.penalized_loglik;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["stop_reason"] = std::string(to_string(fit.stop_reason));
  j["step_dot_grad"] = fit.step_dot_grad;
  j["seconds"] = fit.seconds;
  j["trace"] = fit.trace;
  j["start_fallback"] = fit.start_fallback;
  if (config) j["config"] = to_json(*config);
  return j;
}

}  // namespace mvmatern
