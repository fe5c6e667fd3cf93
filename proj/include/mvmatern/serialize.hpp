#pragma once

#include "mvmatern/optimizer.hpp"
#include "mvmatern/params.hpp"
#include "mvmatern/vecchia_plan.hpp"

#include "json.hpp"

namespace mvmatern {

using json = nlohmann::json;

json to_json(const Eigen::MatrixXd& m);
json to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const json& j);
Eigen::VectorXd vector_from_json(const json& j);

json to_json(Model model);
Model model_from_json(const json& j);

/// Keys "sigma", "alpha", "nu", "tau" (p x p) and "mu" (p).
json to_json(const StructuralParams& params);
StructuralParams params_from_json(const json& j, int d);

json to_json(const VecchiaPlan& plan);
VecchiaPlan plan_from_json(const json& j);

json to_json(const FitConfig& config);

/// Parameters plus "model", "theta", "coordinates", "loglik",
/// "penalized_loglik", "iterations", "converged", "stop_reason", "seconds",
/// "trace" and, when given, "config".
json to_json(const FitResult& fit, const FitConfig* config = nullptr);

}  // namespace mvmatern
