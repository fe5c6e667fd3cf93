#include "mvmatern/commands.hpp"

#include "mvmatern/errors.hpp"
#include "mvmatern/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

namespace mvmatern {

FitRun run_fit(const SpatialDataset& data, const RunSpec& spec) {
  FitRun run;
  run.plan = make_plan(data, spec.ordering, spec.rule, spec.m, spec.seed);
  run.start = starting_values(data, spec.model, run.plan, spec.config);
  run.fit = fisher_scoring(data, run.plan, spec.model, run.start.theta, spec.config);
  run.fit.start_fallback = run.start.any_fallback();
  return run;
}

std::vector<std::pair<std::string, double>> parameter_rows(const StructuralParams& params) {
  std::vector<std::pair<std::string, double>> rows;
  const std::pair<const char*, const Eigen::MatrixXd*> blocks[] = {
      {"sigma", &params.sigma}, {"alpha", &params.alpha}, {"nu", &params.nu}, {"tau", &params.tau}};
  for (const auto& [name, m] : blocks)
    for (int i = 0; i < params.p; ++i)
      for (int j = i; j < params.p; ++j)
        rows.emplace_back(std::string(name) + "_" + std::to_string(i + 1) + std::to_string(j + 1),
                          (*m)(i, j));
  return rows;
}

void print_fit_table(std::ostream& out,
                     const std::vector<std::pair<std::string, const FitResult*>>& fits) {
  if (fits.empty()) return;
  constexpr int name_w = 12, col_w = 16;
  out << std::left << std::setw(name_w) << "" << std::right;
  for (const auto& [label, fit] : fits) out << std::setw(col_w) << label;
  out << '\n';

  const auto first = parameter_rows(fits.front().second->params);
  std::vector<std::vector<std::pair<std::string, double>>> all;
  for (const auto& f : fits) all.push_back(parameter_rows(f.second->params));
  out << std::setprecision(4);
  for (std::size_t r = 0; r < first.size(); ++r) {
    out << std::left << std::setw(name_w) << first[r].first << std::right;
    for (const auto& rows : all) out << std::setw(col_w) << rows[r].second;
    out << '\n';
  }
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(name_w) << "loglik" << std::right;
  for (const auto& f : fits) out << std::setw(col_w) << f.second->loglik;
  out << '\n' << std::left << std::setw(name_w) << "iter" << std::right;
  for (const auto& f : fits) out << std::setw(col_w) << f.second->iterations;
  out << '\n' << std::left << std::setw(name_w) << "seconds" << std::right;
  for (const auto& f : fits) out << std::setw(col_w) << f.second->seconds;
  out << '\n' << std::left << std::setw(name_w) << "stop" << std::right;
  for (const auto& f : fits) out << std::setw(col_w) << to_string(f.second->stop_reason);
  out << '\n';
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

namespace {

LoadReport load(const RunSpec& spec, std::ostream& err) {
  auto report = load_dataset(spec.input, spec.columns);
  err << "read " << report.rows_read << " rows; " << report.missing_dropped
      << " dropped for missing fields; " << report.duplicates_removed << " duplicate"
      << (report.duplicates_removed == 1 ? "" : "s") << " removed; n = "
      << report.dataset.size() << ", p = " << report.dataset.components() << '\n';
  return report;
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.empty()) return;
  if (path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

json run_json(const RunSpec& spec, const FitRun& run) {
  json j = to_json(run.fit, &spec.config);
  j["ordering"] = std::string(to_string(spec.ordering));
  j["neighbors"] = std::string(to_string(spec.rule));
  j["m"] = spec.m;
  j["seed"] = spec.seed;
  return j;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace

int fit_command(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto report = load(spec, err);
    const FitRun run = run_fit(report.dataset, spec);
    if (run.fit.start_fallback)
      err << "warning: a marginal fit failed; heuristic starting values were used\n";
    print_fit_table(out, {{std::string(to_string(spec.model.family)), &run.fit}});
    write_json(spec.output, run_json(spec, run));
    return run.fit.converged ? 0 : 2;
  });
}

std::vector<BenchmarkCell> run_benchmark(const SpatialDataset& data, const BenchmarkSpec& spec) {
  std::vector<BenchmarkCell> cells;
  for (int m : spec.ms)
    for (OrderingScheme o : spec.orderings)
      for (NeighborRule r : spec.rules)
        for (const Model& model : spec.models) {
          BenchmarkCell cell;
          cell.ordering = o;
          cell.rule = r;
          cell.m = m;
          cell.model = model;
          try {
            RunSpec rs;
            rs.model = model;
            rs.ordering = o;
            rs.rule = r;
            rs.m = m;
            rs.seed = spec.seed;
            rs.config = spec.config;
            const FitRun run = run_fit(data, rs);
            cell.ok = true;
            cell.loglik = run.fit.loglik;
            cell.iterations = run.fit.iterations;
            cell.stop_reason = run.fit.stop_reason;
            cell.seconds = run.fit.seconds;
          } catch (const std::exception& e) {
            cell.error = e.what();
          }
          cells.push_back(std::move(cell));
        }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cells)
    if (c.ok) best = std::max(best, c.loglik);
  for (auto& c : cells)
    if (c.ok) c.diff_from_max = c.loglik - best;
  return cells;
}

void print_benchmark_table(std::ostream& out, const std::vector<BenchmarkCell>& cells) {
  out << std::left << std::setw(11) << "ordering" << std::setw(14) << "neighbors" << std::right
      << std::setw(4) << "m" << "  " << std::left << std::setw(15) << "model" << std::right
      << std::setw(12) << "loglik-max" << std::setw(6) << "iter" << "  stop\n";
  for (const auto& c : cells) {
    out << std::left << std::setw(11) << to_string(c.ordering) << std::setw(14)
        << to_string(c.rule) << std::right << std::setw(4) << c.m << "  " << std::left
        << std::setw(15) << to_string(c.model.family) << std::right;
    if (c.ok) {
      out << std::fixed << std::setprecision(2) << std::setw(12) << c.diff_from_max
          << std::setw(6) << c.iterations << "  " << to_string(c.stop_reason) << '\n';
      out.unsetf(std::ios::floatfield);
    } else {
      out << std::setw(12) << "failed" << std::setw(6) << "-" << "  " << c.error << '\n';
    }
  }
}

json to_json(const std::vector<BenchmarkCell>& cells) {
  json arr = json::array();
  for (const auto& c : cells) {
    json j{{"ordering", std::string(to_string(c.ordering))},
           {"neighbors", std::string(to_string(c.rule))},
           {"m", c.m},
           {"model", to_json(c.model)},
           {"ok", c.ok}};
    if (c.ok) {
      j["loglik"] = c.loglik;
      j["diff_from_max"] = c.diff_from_max;
      j["iterations"] = c.iterations;
      j["stop_reason"] = std::string(to_string(c.stop_reason));
      j["seconds"] = c.seconds;
    } else {
      j["error"] = c.error;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

int benchmark_command(const RunSpec& base, const BenchmarkSpec& spec, std::ostream& out,
                      std::ostream& err) {
  return guarded(err, [&] {
    const auto report = load(base, err);
    const auto cells = run_benchmark(report.dataset, spec);
    print_benchmark_table(out, cells);
    write_json(base.output, to_json(cells));
    return 0;
  });
}

NuggetStudy run_nugget_study(const SpatialDataset& data, const RunSpec& spec) {
  if (spec.model.family == Family::Independent)
    throw std::invalid_argument("nugget study: the independent family has no cross nugget");
  NuggetStudy study;
  RunSpec s = spec;
  s.model.zero_cross_nugget = false;
  study.free_fit = run_fit(data, s);
  s.model.zero_cross_nugget = true;
  study.zero_fit = run_fit(data, s);
  study.loglik_difference = study.free_fit.fit.loglik - study.zero_fit.fit.loglik;
  return study;
}

int nugget_study_command(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto report = load(spec, err);
    const NuggetStudy study = run_nugget_study(report.dataset, spec);
    print_fit_table(out, {{"free nugget", &study.free_fit.fit},
                          {"tau_ij = 0", &study.zero_fit.fit}});
    out << std::fixed << std::setprecision(2) << "loglik difference (free - zero): "
        << study.loglik_difference << '\n';
    out.unsetf(std::ios::floatfield);
    RunSpec zero = spec;
    zero.model.zero_cross_nugget = true;
    json j{{"free", run_json(spec, study.free_fit)},
           {"zero_cross_nugget", run_json(zero, study.zero_fit)},
           {"loglik_difference", study.loglik_difference}};
    write_json(spec.output, j);
    const bool ok = study.free_fit.fit.converged && study.zero_fit.fit.converged;
    return ok ? 0 : 2;
  });
}

int plan_command(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto report = load(spec, err);
    const auto plan = make_plan(report.dataset, spec.ordering, spec.rule, spec.m, spec.seed);
    if (spec.output.empty()) {
      out << to_json(plan).dump() << '\n';
    } else {
      write_json(spec.output, to_json(plan));
    }
    return 0;
  });
}

SpatialDataset simulate_dataset(const StructuralParams& params, std::size_t n_locations,
                                std::uint64_t seed, const std::vector<std::string>& labels) {
  const int p = params.p, d = params.d;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> sites(n_locations * d);
  for (auto& v : sites) v = unif(rng);

  std::vector<double> coords;
  std::vector<int> comps;
  coords.reserve(n_locations * d * p);
  for (std::size_t i = 0; i < n_locations; ++i)
    for (int c = 0; c < p; ++c) {
      coords.insert(coords.end(), sites.begin() + i * d, sites.begin() + (i + 1) * d);
      comps.push_back(c);
    }
  auto y = simulate(coords, comps, params, rng());

  std::vector<std::string> names = labels;
  if (names.empty())
    for (int c = 0; c < p; ++c) {
      std::ostringstream s;
      s << "y" << std::setw(2) << std::setfill('0') << c + 1;
      names.push_back(s.str());
    }
  return SpatialDataset::from_indexed(d, std::move(coords), std::move(comps), std::move(y),
                                      names);
}

}  // namespace mvmatern
