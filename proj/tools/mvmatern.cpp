// mvmatern: fit multivariate Matérn models to point-referenced data with
// Vecchia's approximation.

#include "mvmatern/commands.hpp"
#include "mvmatern/errors.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace mvmatern;

namespace {

struct Options {
  std::string model = "unconstrained";
  std::string ordering = "random";
  std::string neighbors = "any";
  std::vector<std::string> x_cols{"x", "y"};
  std::string component_col = "comp";
  std::string response_col = "value";
  std::string input;
  std::string output;
  int m = 20;
  std::uint64_t seed = 1;
  int max_iter = 40;
  bool zero_cross_nugget = false;
  bool no_penalties = false;
};

void add_common(CLI::App* cmd, Options& o, bool with_model) {
  cmd->add_option("--input,-i", o.input, "CSV file with a header row")->required();
  cmd->add_option("--x-cols", o.x_cols, "coordinate columns")->delimiter(',');
  cmd->add_option("--component-col", o.component_col, "component label column");
  cmd->add_option("--response-col", o.response_col, "response column");
  cmd->add_option("--ordering", o.ordering, "random | component | cycle");
  cmd->add_option("--neighbors", o.neighbors, "any | balanced | preferential");
  cmd->add_option("-m", o.m, "neighbors per observation");
  cmd->add_option("--seed", o.seed, "ordering seed");
  cmd->add_option("--output,-o", o.output, "JSON output path ('-' for stdout)");
  if (with_model) {
    cmd->add_option("--model", o.model,
                    "independent | parsimonious | flexible-a | flexible-e | unconstrained");
    cmd->add_option("--max-iter", o.max_iter, "Fisher scoring iteration cap");
    cmd->add_flag("--zero-cross-nugget", o.zero_cross_nugget, "force tau_ij = 0 for i != j");
    cmd->add_flag("--no-penalties", o.no_penalties, "fit the unpenalized loglikelihood");
  }
}

RunSpec to_spec(const Options& o) {
  RunSpec s;
  s.model.family = family_from_string(o.model);
  s.model.zero_cross_nugget = o.zero_cross_nugget;
  s.ordering = ordering_from_string(o.ordering);
  s.rule = neighbor_rule_from_string(o.neighbors);
  s.m = o.m;
  s.seed = o.seed;
  s.config.max_iter = o.max_iter;
  s.config.penalties_on = !o.no_penalties;
  s.config.seed = o.seed;
  s.input = o.input;
  s.output = o.output;
  s.columns.x_cols = o.x_cols;
  s.columns.component_col = o.component_col;
  s.columns.response_col = o.response_col;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate Matérn fitting with Vecchia's approximation"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "fit one model and print its parameter table");
  add_common(fit, o, true);

  auto* plan = app.add_subcommand("plan", "write the ordering and conditioning sets as JSON");
  add_common(plan, o, false);

  std::vector<std::string> models{"independent"};
  std::vector<int> ms{20, 40};
  auto* bench = app.add_subcommand("benchmark", "fit over the ordering x neighbor x m grid");
  add_common(bench, o, true);
  bench->add_option("--models", models, "families to fit in every cell")->delimiter(',');
  bench->add_option("--ms", ms, "neighbor counts")->delimiter(',');

  auto* nugget = app.add_subcommand("nugget-study", "paired fits with and without cross nugget");
  add_common(nugget, o, true);

  std::string params_path;
  std::size_t n_locations = 300;
  auto* sim = app.add_subcommand("simulate", "draw co-located data from a parameter JSON file");
  sim->add_option("--params", params_path, "JSON with sigma, alpha, nu, tau, mu")->required();
  sim->add_option("--locations,-n", n_locations, "number of locations in the unit square");
  sim->add_option("--seed", o.seed, "simulation seed");
  sim->add_option("--output,-o", o.output, "CSV output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      std::ifstream f(params_path);
      if (!f) throw InputError("cannot read " + params_path);
      const auto params = params_from_json(json::parse(f), 2);
      const auto data = simulate_dataset(params, n_locations, o.seed);
      write_dataset(o.output, data, ColumnSpec{});
      return 0;
    }
    const RunSpec spec = to_spec(o);
    if (*fit) return fit_command(spec, std::cout, std::cerr);
    if (*plan) return plan_command(spec, std::cout, std::cerr);
    if (*nugget) return nugget_study_command(spec, std::cout, std::cerr);
    if (*bench) {
      BenchmarkSpec b;
      b.ms = ms;
      b.models.clear();
      for (const auto& name : models) b.models.push_back({family_from_string(name), o.zero_cross_nugget});
      b.seed = spec.seed;
      b.config = spec.config;
      return benchmark_command(spec, b, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
