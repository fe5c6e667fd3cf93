// Parallel Vecchia kernel against the serial reference, and the parallel
// kernel across thread counts.

#include "mvmatern/commands.hpp"
#include "mvmatern/likelihood.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

using namespace mvmatern;

namespace {

struct Problem {
  SpatialDataset data;
  VecchiaPlan plan;
  Model model{Family::Parsimonious, false};
  ParameterVector theta;
};

const Problem& problem(int n_locations, int m) {
  static std::map<std::pair<int, int>, Problem> cache;
  auto [it, fresh] = cache.try_emplace({n_locations, m});
  if (fresh) {
    StructuralParams truth(2, 2);
    truth.sigma << 1.0, 0.5, 0.5, 1.0;
    truth.alpha.setConstant(0.1);
    truth.nu << 0.5, 0.75, 0.75, 1.0;
    truth.tau << 0.1, 0.0, 0.0, 0.1;
    truth.mu.setZero();
    Problem& pr = it->second;
    pr.data = simulate_dataset(truth, static_cast<std::size_t>(n_locations), 7);
    pr.plan = make_plan(pr.data, OrderingScheme::Random, NeighborRule::Any, m, 3);
    MarginalStart s{Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(0.1, 0.1),
                    Eigen::Vector2d(0.5, 1.0), Eigen::Vector2d(0.1, 0.1)};
    pr.theta = theta_from_marginals(pr.model, s);
  }
  return it->second;
}

void BM_Parallel(benchmark::State& state) {
  const auto& pr = problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  omp_set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state)
    benchmark::DoNotOptimize(loglik_grad_fisher(pr.data, pr.plan, pr.model, pr.theta));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pr.data.size()));
}

void BM_SerialReference(benchmark::State& state) {
  const auto& pr = problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::loglik_grad_fisher(pr.data, pr.plan, pr.model, pr.theta));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pr.data.size()));
}

void BM_ParallelLoglikOnly(benchmark::State& state) {
  const auto& pr = problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  omp_set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(loglik(pr.data, pr.plan, pr.model, pr.theta));
}

}  // namespace

BENCHMARK(BM_SerialReference)->Args({500, 20})->Args({1000, 20})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)
    ->ArgsProduct({{500, 1000}, {20}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParallelLoglikOnly)
    ->ArgsProduct({{1000}, {20, 40}, {1, 4}})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
