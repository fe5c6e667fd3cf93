#pragma once

#include "mvmatern/dataset.hpp"
#include "mvmatern/optimizer.hpp"
#include "mvmatern/params.hpp"
#include "mvmatern/serialize.hpp"
#include "mvmatern/vecchia_plan.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mvmatern {

struct RunSpec {
  Model model;
  OrderingScheme ordering = OrderingScheme::Random;
  NeighborRule rule = NeighborRule::Any;
  int m = 20;
  std::uint64_t seed = 1;
  FitConfig config;
  std::filesystem::path input;
  std::filesystem::path output;  // empty: no JSON file
  ColumnSpec columns;
};

struct FitRun {
  VecchiaPlan plan;
  StartingValues start;
  FitResult fit;
};

/// order -> select_neighbors -> starting_values -> fisher_scoring.
FitRun run_fit(const SpatialDataset& data, const RunSpec& spec);

/// Table-style parameter rows: sigma_ij, alpha_ij, nu_ij, tau_ij for
/// i <= j, each block in row order (11, 12, 22 for p = 2).
std::vector<std::pair<std::string, double>> parameter_rows(const StructuralParams& params);

/// Aligned columns, one per named fit, plus loglik, iterations, seconds
/// and stop reason.
void print_fit_table(std::ostream& out,
                     const std::vector<std::pair<std::string, const FitResult*>>& fits);

/// Exit codes: 0 converged, 1 input or runtime error, 2 not converged.
int fit_command(const RunSpec& spec, std::ostream& out, std::ostream& err);

struct BenchmarkSpec {
  std::vector<OrderingScheme> orderings{OrderingScheme::Random, OrderingScheme::ByComponent,
                                        OrderingScheme::Cycle};
  std::vector<NeighborRule> rules{NeighborRule::Any, NeighborRule::Balanced,
                                  NeighborRule::Preferential};
  std::vector<int> ms{20, 40};
  std::vector<Model> models{{Family::Independent, false}};
  std::uint64_t seed = 1;
  FitConfig config;
};

struct BenchmarkCell {
  OrderingScheme ordering = OrderingScheme::Random;
  NeighborRule rule = NeighborRule::Any;
  int m = 0;
  Model model;
  bool ok = false;
  std::string error;
  double loglik = 0.0;
  double diff_from_max = 0.0;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIter;
  double seconds = 0.0;
};

/// Every (ordering, rule, m, model) cell with the same seed. Failed cells
/// keep their message and are left out of the maximum.
std::vector<BenchmarkCell> run_benchmark(const SpatialDataset& data, const BenchmarkSpec& spec);
void print_benchmark_table(std::ostream& out, const std::vector<BenchmarkCell>& cells);
json to_json(const std::vector<BenchmarkCell>& cells);

int benchmark_command(const RunSpec& base, const BenchmarkSpec& spec, std::ostream& out,
                      std::ostream& err);

struct NuggetStudy {
  FitRun free_fit;
  FitRun zero_fit;
  double loglik_difference = 0.0;  // free - zero
};

/// Two fits of one family differing only in the cross-nugget switch.
/// Throws std::invalid_argument for the Independent family.
NuggetStudy run_nugget_study(const SpatialDataset& data, const RunSpec& spec);

int nugget_study_command(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Writes the plan for `spec` as JSON.
int plan_command(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Draws a dataset from `params` at n uniform locations in the unit
/// hypercube, every component observed at every location.
SpatialDataset simulate_dataset(const StructuralParams& params, std::size_t n_locations,
                                std::uint64_t seed,
                                const std::vector<std::string>& labels = {});

}  // namespace mvmatern
