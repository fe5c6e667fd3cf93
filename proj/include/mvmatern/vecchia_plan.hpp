#pragma once

#include "mvmatern/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mvmatern {

enum class OrderingScheme { Random, ByComponent, Cycle };
enum class NeighborRule { Any, Balanced, Preferential };

std::string_view to_string(OrderingScheme scheme);
std::string_view to_string(NeighborRule rule);
OrderingScheme ordering_from_string(std::string_view name);
NeighborRule neighbor_rule_from_string(std::string_view name);

/// Ordering plus conditioning sets. `permutation[k]` is the observation at
/// position k; `cond_sets[k]` holds positions < k, nearest first.
struct VecchiaPlan {
  std::vector<std::size_t> permutation;
  std::vector<std::vector<std::size_t>> cond_sets;
  int m = 0;
  OrderingScheme ordering = OrderingScheme::Random;
  NeighborRule rule = NeighborRule::Any;
  std::uint64_t seed = 0;
};

/// Seeded permutation of the observations.
///
/// ByComponent groups components in label order and shuffles within each;
/// Cycle shuffles each component and then takes one observation from every
/// component that still has any, sweep after sweep.
std::vector<std::size_t> order(const SpatialDataset& data, OrderingScheme scheme,
                               std::uint64_t seed);

/// Per-component neighbor targets for an observation of `own` component.
/// Balanced: floor(m/p) each, remainder one apiece in label order.
/// Preferential: round(2m/(p+1)) from `own`, the rest split evenly over the
/// other components with any remainder in label order.
std::vector<int> neighbor_quota(NeighborRule rule, int m, int p, int own);

/// Conditioning sets by kd-tree search over earlier positions. Distances are
/// Euclidean in the coordinates only; ties go to the earlier position. A
/// component short of candidates is backfilled from the nearest remaining
/// earlier observations, so |g(k)| = min(k, m) for every rule.
std::vector<std::vector<std::size_t>> select_neighbors(const SpatialDataset& data,
                                                       std::span<const std::size_t> permutation,
                                                       NeighborRule rule, int m);

VecchiaPlan make_plan(const SpatialDataset& data, OrderingScheme scheme, NeighborRule rule,
                      int m, std::uint64_t seed);

namespace reference {
/// Quadratic-time neighbor selection with the same rules as select_neighbors.
std::vector<std::vector<std::size_t>> select_neighbors(const SpatialDataset& data,
                                                       std::span<const std::size_t> permutation,
                                                       NeighborRule rule, int m);
}  // namespace reference

}  // namespace mvmatern
