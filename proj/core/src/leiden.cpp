#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "termweave/community.hpp"
#include "termweave/error.hpp"

namespace termweave {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, n), without modulo bias.
  std::size_t below(std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

/// Sparse accumulator of weights keyed by community label.
class Accumulator {
 public:
  explicit Accumulator(std::size_t n) : weight_(n, 0.0), seen_(n, 0) {}

  void add(std::uint32_t c, double w) {
    if (!seen_[c]) {
      seen_[c] = 1;
      touched_.push_back(c);
    }
    weight_[c] += w;
  }
  double weight(std::uint32_t c) const { return weight_[c]; }
  const std::vector<std::uint32_t>& touched() const { return touched_; }
  void clear() {
    for (auto c : touched_) {
      weight_[c] = 0.0;
      seen_[c] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> weight_;
  std::vector<char> seen_;
  std::vector<std::uint32_t> touched_;
};

std::vector<std::uint32_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(order);
  return order;
}

/// Dense relabelling in order of first appearance; returns the label count.
std::size_t relabel(std::vector<std::uint32_t>& labels) {
  std::vector<std::uint32_t> map(labels.size(), std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  for (auto& l : labels) {
    if (map[l] == std::numeric_limits<std::uint32_t>::max()) map[l] = next++;
    l = map[l];
  }
  return next;
}

// Gains below are expressed as  k_{v,C} - gamma * K_C * k_v / 2M,  which is
// M times the change in Q_gamma when the isolated vertex v joins C.

bool move_nodes_fast(const WeightedGraph& g, std::vector<std::uint32_t>& membership, double gamma, double eps,
                     Rng& rng) {
  const std::size_t n = g.size();
  const double two_m = g.total_degree();
  std::vector<double> comm_degree(n, 0.0);
  std::vector<std::uint32_t> comm_size(n, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    comm_degree[membership[v]] += g.degree(v);
    ++comm_size[membership[v]];
  }
  std::vector<std::uint32_t> empty;
  for (std::uint32_t c = static_cast<std::uint32_t>(n); c-- > 0;) {
    if (comm_size[c] == 0) empty.push_back(c);
  }

  std::deque<std::uint32_t> queue;
  for (auto v : shuffled_order(n, rng)) queue.push_back(v);
  std::vector<char> queued(n, 1);
  Accumulator acc(n);
  bool moved = false;

  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    queued[v] = 0;

    const auto current = membership[v];
    const double kv = g.degree(v);
    const auto nbrs = g.neighbors(v);
    const auto ws = g.weights(v);
    acc.clear();
    for (std::size_t i = 0; i < nbrs.size(); ++i) acc.add(membership[nbrs[i]], ws[i]);

    comm_degree[current] -= kv;
    --comm_size[current];

    std::uint32_t best = current;
    double best_gain = acc.weight(current) - gamma * comm_degree[current] * kv / two_m;
    for (auto c : acc.touched()) {
      if (c == current) continue;
      const double gain = acc.weight(c) - gamma * comm_degree[c] * kv / two_m;
      if (gain > best_gain + eps) {
        best = c;
        best_gain = gain;
      }
    }
    if (comm_size[current] > 0 && 0.0 > best_gain + eps && !empty.empty()) {
      best = empty.back();
      best_gain = 0.0;
    }

    membership[v] = best;
    comm_degree[best] += kv;
    ++comm_size[best];
    if (best == current) continue;

    moved = true;
    if (!empty.empty() && empty.back() == best) empty.pop_back();
    if (comm_size[current] == 0) empty.push_back(current);
    for (auto u : nbrs) {
      if (!queued[u] && membership[u] != best) {
        queued[u] = 1;
        queue.push_back(u);
      }
    }
  }
  return moved;
}

/// Splits every community of `membership` into well-connected
/// subcommunities. Singletons that are well connected to their community join
/// the candidate subcommunity with the largest strictly positive gain; equal
/// gains are broken uniformly at random.
std::vector<std::uint32_t> refine(const WeightedGraph& g, const std::vector<std::uint32_t>& membership,
                                  std::size_t communities, double gamma, double eps, Rng& rng) {
  const std::size_t n = g.size();
  const double two_m = g.total_degree();
  std::vector<std::uint32_t> refined(n);
  std::iota(refined.begin(), refined.end(), 0u);
  std::vector<double> r_degree(n);
  std::vector<std::uint32_t> r_size(n, 1);
  std::vector<double> external(n, 0.0);  // E(R, S - R)
  for (std::uint32_t v = 0; v < n; ++v) r_degree[v] = g.degree(v);

  std::vector<std::vector<std::uint32_t>> members(communities);
  for (std::uint32_t v = 0; v < n; ++v) members[membership[v]].push_back(v);

  Accumulator acc(n);
  std::vector<std::uint32_t> ties;
  for (auto& group : members) {
    if (group.size() < 2) continue;
    double group_degree = 0;
    for (auto v : group) group_degree += g.degree(v);
    std::vector<char> well_connected(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
      const auto v = group[i];
      const auto nbrs = g.neighbors(v);
      const auto ws = g.weights(v);
      double inside = 0;
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        if (membership[nbrs[k]] == membership[v]) inside += ws[k];
      }
      external[v] = inside;
      well_connected[i] = inside + eps >= gamma * g.degree(v) * (group_degree - g.degree(v)) / two_m;
    }

    std::vector<std::uint32_t> order(group.size());
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);
    for (auto idx : order) {
      if (!well_connected[idx]) continue;
      const auto v = group[idx];
      const auto own = refined[v];
      if (r_size[own] != 1) continue;

      const auto nbrs = g.neighbors(v);
      const auto ws = g.weights(v);
      acc.clear();
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        if (membership[nbrs[k]] == membership[v]) acc.add(refined[nbrs[k]], ws[k]);
      }
      const double kv = g.degree(v);
      double best_gain = 0.0;
      ties.clear();
      for (auto c : acc.touched()) {
        if (c == own) continue;
        if (external[c] + eps < gamma * r_degree[c] * (group_degree - r_degree[c]) / two_m) continue;
        const double gain = acc.weight(c) - gamma * r_degree[c] * kv / two_m;
        if (gain <= eps) continue;
        if (ties.empty() || gain > best_gain + eps) {
          best_gain = gain;
          ties.assign(1, c);
        } else if (gain >= best_gain - eps) {
          ties.push_back(c);
        }
      }
      if (ties.empty()) continue;
      const auto target = ties.size() == 1 ? ties.front() : ties[rng.below(ties.size())];
      external[target] = external[target] + external[own] - 2.0 * acc.weight(target);
      r_degree[target] += kv;
      ++r_size[target];
      r_size[own] = 0;
      r_degree[own] = 0.0;
      refined[v] = target;
    }
  }
  relabel(refined);
  return refined;
}

/// One Leiden pass starting from `initial` (labels < n) on the original graph.
std::vector<std::uint32_t> leiden_pass(const WeightedGraph& g0, std::vector<std::uint32_t> initial, double gamma,
                                       double eps, Rng& rng) {
  std::optional<WeightedGraph> storage;
  const WeightedGraph* g = &g0;
  std::vector<std::uint32_t> node_of(g0.size());
  std::iota(node_of.begin(), node_of.end(), 0u);
  std::vector<std::uint32_t> part = std::move(initial);

  while (true) {
    move_nodes_fast(*g, part, gamma, eps, rng);
    const std::size_t count = relabel(part);
    if (count == g->size()) break;

    auto refined = refine(*g, part, count, gamma, eps, rng);
    std::size_t refined_count = 1 + *std::max_element(refined.begin(), refined.end());
    if (refined_count == g->size()) {
      // nothing merged during refinement: aggregate on the partition itself
      refined = part;
      refined_count = count;
    }
    std::vector<std::uint32_t> next_part(refined_count);
    for (std::uint32_t v = 0; v < g->size(); ++v) next_part[refined[v]] = part[v];
    for (auto& node : node_of) node = refined[node];
    WeightedGraph next = g->aggregate(refined, refined_count);
    storage = std::move(next);
    g = &*storage;
    part = std::move(next_part);
  }

  std::vector<std::uint32_t> out(g0.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = part[node_of[v]];
  return out;
}

/// Splits communities into their connected components (never lowers Q for gamma >= 0).
std::vector<std::uint32_t> split_disconnected(const WeightedGraph& g, const std::vector<std::uint32_t>& membership) {
  const std::size_t n = g.size();
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> out(n, unset);
  std::uint32_t next = 0;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (out[s] != unset) continue;
    out[s] = next;
    stack.assign(1, s);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      const auto nbrs = g.neighbors(v);
      const auto ws = g.weights(v);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        const auto u = nbrs[k];
        if (out[u] == unset && ws[k] > 0.0 && membership[u] == membership[v]) {
          out[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return out;
}

}  // namespace

LeidenResult leiden(const WeightedGraph& graph, double gamma, std::uint64_t seed, const LeidenOptions& options) {
  return leiden(graph, gamma, seed, Partition::singletons(graph.size()), options);
}

LeidenResult leiden(const WeightedGraph& graph, double gamma, std::uint64_t seed, const Partition& initial,
                    const LeidenOptions& options) {
  if (!(gamma >= 0.0)) throw DataError("resolution must be non-negative");
  if (initial.membership.size() != graph.size()) throw DataError("initial partition does not cover the graph");
  LeidenResult result;
  if (graph.size() == 0) return result;
  if (graph.total_degree() <= 0.0) {
    result.partition = Partition::singletons(graph.size());
    return result;
  }

  Rng rng(seed);
  const double eps = 1e-12 * graph.total_degree();
  Partition current = Partition::from_labels(initial.membership);
  result.quality_trace.push_back(modularity(graph, current, gamma));
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    ++result.iterations;
    Partition next = Partition::from_labels(leiden_pass(graph, current.membership, gamma, eps, rng));
    if (next == current) break;
    const double q = modularity(graph, next, gamma);
    if (q < result.quality_trace.back()) break;
    current = std::move(next);
    result.quality_trace.push_back(q);
  }
  Partition split = Partition::from_labels(split_disconnected(graph, current.membership));
  if (split.community_count != current.community_count) {
    current = std::move(split);
    result.quality_trace.push_back(modularity(graph, current, gamma));
  }
  result.partition = std::move(current);
  return result;
}

}  // namespace termweave
