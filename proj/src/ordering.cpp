#include "mvmatern/vecchia_plan.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace mvmatern {

std::string_view to_string(OrderingScheme scheme) {
  switch (scheme) {
    case OrderingScheme::Random: return "random";
    case OrderingScheme::ByComponent: return "component";
    case OrderingScheme::Cycle: return "cycle";
  }
  return "unknown";
}

std::string_view to_string(NeighborRule rule) {
  switch (rule) {
    case NeighborRule::Any: return "any";
    case NeighborRule::Balanced: return "balanced";
    case NeighborRule::Preferential: return "preferential";
  }
  return "unknown";
}

OrderingScheme ordering_from_string(std::string_view name) {
  if (name == "random" || name == "rand") return OrderingScheme::Random;
  if (name == "component" || name == "comp") return OrderingScheme::ByComponent;
  if (name == "cycle" || name == "cyc") return OrderingScheme::Cycle;
  throw std::invalid_argument("unknown ordering scheme: " + std::string(name));
}

NeighborRule neighbor_rule_from_string(std::string_view name) {
  if (name == "any") return NeighborRule::Any;
  if (name == "balanced" || name == "bal") return NeighborRule::Balanced;
  if (name == "preferential" || name == "pref") return NeighborRule::Preferential;
  throw std::invalid_argument("unknown neighbor rule: " + std::string(name));
}

namespace {

// Fisher-Yates on raw mt19937_64 output so the result does not depend on
// the standard library's distribution implementations.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::vector<std::size_t> order(const SpatialDataset& data, OrderingScheme scheme,
                               std::uint64_t seed) {
  const std::size_t n = data.size();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm;
  perm.reserve(n);
  if (scheme == OrderingScheme::Random) {
    for (std::size_t i = 0; i < n; ++i) perm.push_back(i);
    shuffle(perm, rng);
    return perm;
  }

  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(data.components()));
  for (std::size_t i = 0; i < n; ++i) groups[data.component(i)].push_back(i);
  for (auto& g : groups) shuffle(g, rng);

  if (scheme == OrderingScheme::ByComponent) {
    for (const auto& g : groups) perm.insert(perm.end(), g.begin(), g.end());
    return perm;
  }
  std::vector<std::size_t> next(groups.size(), 0);
  while (perm.size() < n) {
    for (std::size_t c = 0; c < groups.size(); ++c)
      if (next[c] < groups[c].size()) perm.push_back(groups[c][next[c]++]);
  }
  return perm;
}

VecchiaPlan make_plan(const SpatialDataset& data, OrderingScheme scheme, NeighborRule rule,
                      int m, std::uint64_t seed) {
  if (m < 0) throw std::invalid_argument("make_plan: neighbor budget must be nonnegative");
  VecchiaPlan plan;
  plan.permutation = order(data, scheme, seed);
  plan.cond_sets = select_neighbors(data, plan.permutation, rule, m);
  plan.m = m;
  plan.ordering = scheme;
  plan.rule = rule;
  plan.seed = seed;
  return plan;
}

}  // namespace mvmatern
