#include "mvmatern/vecchia_plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mvmatern {

namespace {

struct Candidate {
  double dist2;
  std::size_t position;
  bool operator<(const Candidate& o) const {
    return dist2 < o.dist2 || (dist2 == o.dist2 && position < o.position);
  }
};

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// Bounded max-heap keeping the `capacity` best candidates.
class CandidateHeap {
 public:
  explicit CandidateHeap(std::size_t capacity) : capacity_(capacity) { items_.reserve(capacity); }
  bool full() const { return items_.size() >= capacity_; }
  const Candidate& worst() const { return items_.front(); }
  void offer(const Candidate& c) {
    if (capacity_ == 0) return;
    if (!full()) {
      items_.push_back(c);
      std::push_heap(items_.begin(), items_.end());
    } else if (c < worst()) {
      std::pop_heap(items_.begin(), items_.end());
      items_.back() = c;
      std::push_heap(items_.begin(), items_.end());
    }
  }
  std::vector<Candidate> sorted() && {
    std::sort_heap(items_.begin(), items_.end());
    return std::move(items_);
  }

 private:
  std::size_t capacity_;
  std::vector<Candidate> items_;
};

// kd-tree over all observations. Each node records, per component, the
// smallest ordering position below it so that searches restricted to
// "earlier than k" (and optionally one component) skip whole subtrees.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 12;

  KdTree(const SpatialDataset& data, std::span<const std::size_t> rank)
      : data_(data), rank_(rank), dim_(data.dim()), slots_(data.components() + 1) {
    idx_.resize(data.size());
    std::iota(idx_.begin(), idx_.end(), std::size_t{0});
    if (!idx_.empty()) build(0, idx_.size());
  }

  std::vector<Candidate> nearest(std::size_t obs, std::size_t limit, int component,
                                 std::size_t count) const {
    CandidateHeap heap(count);
    if (count > 0 && !nodes_.empty())
      search(0, data_.location(obs), limit, component < 0 ? slots_ - 1 : component, heap);
    return std::move(heap).sorted();
  }

 private:
  struct Node {
    std::size_t begin, end;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    lo_.resize(lo_.size() + dim_);
    hi_.resize(hi_.size() + dim_);
    min_rank_.resize(min_rank_.size() + slots_, std::numeric_limits<std::size_t>::max());
    double* lo = &lo_[id * dim_];
    double* hi = &hi_[id * dim_];
    for (int k = 0; k < dim_; ++k) {
      lo[k] = std::numeric_limits<double>::infinity();
      hi[k] = -std::numeric_limits<double>::infinity();
    }
    for (std::size_t t = begin; t < end; ++t) {
      const auto loc = data_.location(idx_[t]);
      for (int k = 0; k < dim_; ++k) {
        lo[k] = std::min(lo[k], loc[k]);
        hi[k] = std::max(hi[k], loc[k]);
      }
      auto& own = min_rank_[id * slots_ + data_.component(idx_[t])];
      auto& any = min_rank_[id * slots_ + slots_ - 1];
      own = std::min(own, rank_[idx_[t]]);
      any = std::min(any, rank_[idx_[t]]);
    }
    if (end - begin <= kLeafSize) return id;

    int split = 0;
    for (int k = 1; k < dim_; ++k)
      if (hi[k] - lo[k] > hi[split] - lo[split]) split = k;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(idx_.begin() + begin, idx_.begin() + mid, idx_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                       return data_.location(a)[split] < data_.location(b)[split];
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  double box_distance2(int id, std::span<const double> q) const {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const double lo = lo_[id * dim_ + k], hi = hi_[id * dim_ + k];
      const double d = q[k] < lo ? lo - q[k] : (q[k] > hi ? q[k] - hi : 0.0);
      s += d * d;
    }
    return s;
  }

  void search(int id, std::span<const double> q, std::size_t limit, int slot,
              CandidateHeap& heap) const {
    if (min_rank_[id * slots_ + slot] >= limit) return;
    if (heap.full() && box_distance2(id, q) > heap.worst().dist2) return;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::size_t t = node.begin; t < node.end; ++t) {
        const std::size_t obs = idx_[t];
        if (rank_[obs] >= limit) continue;
        if (slot != slots_ - 1 && data_.component(obs) != slot) continue;
        heap.offer({squared_distance(q, data_.location(obs)), rank_[obs]});
      }
      return;
    }
    const double dl = box_distance2(node.left, q);
    const double dr = box_distance2(node.right, q);
    if (dl <= dr) {
      search(node.left, q, limit, slot, heap);
      search(node.right, q, limit, slot, heap);
    } else {
      search(node.right, q, limit, slot, heap);
      search(node.left, q, limit, slot, heap);
    }
  }

  const SpatialDataset& data_;
  std::span<const std::size_t> rank_;
  int dim_;
  int slots_;
  std::vector<std::size_t> idx_;
  std::vector<Node> nodes_;
  std::vector<double> lo_, hi_;
  std::vector<std::size_t> min_rank_;
};

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> rank(perm.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    if (perm[k] >= perm.size() || rank[perm[k]] != std::numeric_limits<std::size_t>::max())
      throw std::invalid_argument("select_neighbors: not a permutation");
    rank[perm[k]] = k;
  }
  return rank;
}

// Shared quota/backfill logic. `nearest(k, component, count)` returns the
// `count` nearest earlier positions (component < 0 means any), sorted.
template <typename Nearest>
std::vector<std::vector<std::size_t>> select_with(const SpatialDataset& data,
                                                  std::span<const std::size_t> perm,
                                                  NeighborRule rule, int m, Nearest&& nearest) {
  if (m < 0) throw std::invalid_argument("select_neighbors: m must be nonnegative");
  if (perm.size() != data.size())
    throw std::invalid_argument("select_neighbors: permutation size mismatch");
  const int p = data.components();
  const std::size_t budget = static_cast<std::size_t>(m);
  std::vector<std::vector<std::size_t>> sets(perm.size());
  std::vector<Candidate> chosen;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const std::size_t target = std::min(k, budget);
    if (target == 0) continue;
    chosen.clear();
    if (rule == NeighborRule::Any || p == 1) {
      chosen = nearest(k, -1, target);
    } else {
      const auto quota = neighbor_quota(rule, m, p, data.component(perm[k]));
      for (int c = 0; c < p; ++c) {
        if (quota[c] == 0) continue;
        auto part = nearest(k, c, static_cast<std::size_t>(quota[c]));
        chosen.insert(chosen.end(), part.begin(), part.end());
      }
      if (chosen.size() < target) {
        // Each candidate appears once, so the overall nearest `target`
        // contain enough unchosen ones.
        const auto fill = nearest(k, -1, target);
        for (const auto& c : fill) {
          if (chosen.size() >= target) break;
          const bool taken = std::any_of(chosen.begin(), chosen.end(), [&](const Candidate& x) {
            return x.position == c.position;
          });
          if (!taken) chosen.push_back(c);
        }
      }
      std::sort(chosen.begin(), chosen.end());
    }
    sets[k].reserve(chosen.size());
    for (const auto& c : chosen) sets[k].push_back(c.position);
  }
  return sets;
}

}  // namespace

std::vector<int> neighbor_quota(NeighborRule rule, int m, int p, int own) {
  std::vector<int> quota(static_cast<std::size_t>(p), 0);
  if (p == 1 || rule == NeighborRule::Any) {
    quota[own] = m;
    return quota;
  }
  if (rule == NeighborRule::Balanced) {
    for (int c = 0; c < p; ++c) quota[c] = m / p + (c < m % p ? 1 : 0);
    return quota;
  }
  const int own_count = std::min(m, static_cast<int>(std::lround(2.0 * m / (p + 1))));
  const int rest = m - own_count;
  quota[own] = own_count;
  int slot = 0;
  for (int c = 0; c < p; ++c) {
    if (c == own) continue;
    quota[c] = rest / (p - 1) + (slot < rest % (p - 1) ? 1 : 0);
    ++slot;
  }
  return quota;
}

std::vector<std::vector<std::size_t>> select_neighbors(const SpatialDataset& data,
                                                       std::span<const std::size_t> permutation,
                                                       NeighborRule rule, int m) {
  const auto rank = inverse_permutation(permutation);
  const KdTree tree(data, rank);
  return select_with(data, permutation, rule, m,
                     [&](std::size_t k, int component, std::size_t count) {
                       return tree.nearest(permutation[k], k, component, count);
                     });
}

namespace reference {

std::vector<std::vector<std::size_t>> select_neighbors(const SpatialDataset& data,
                                                       std::span<const std::size_t> permutation,
                                                       NeighborRule rule, int m) {
  inverse_permutation(permutation);
  std::vector<Candidate> all;
  return select_with(data, permutation, rule, m,
                     [&](std::size_t k, int component, std::size_t count) {
                       all.clear();
                       const auto q = data.location(permutation[k]);
                       for (std::size_t j = 0; j < k; ++j) {
                         const std::size_t obs = permutation[j];
                         if (component >= 0 && data.component(obs) != component) continue;
                         all.push_back({squared_distance(q, data.location(obs)), j});
                       }
                       std::sort(all.begin(), all.end());
                       if (all.size() > count) all.resize(count);
                       return all;
                     });
}

}  // namespace reference

}  // namespace mvmatern
