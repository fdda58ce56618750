#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace termweave {

struct TermGraph;

/// Undirected weighted graph in CSR form, the working representation of the
/// community optimizer. self_weight[v] holds the ordered-pair sum of weights
/// folded into v (twice the internal weight of an aggregated node).
class WeightedGraph {
 public:
  struct Edge {
    std::uint32_t u;
    std::uint32_t v;
    double weight;
  };

  WeightedGraph() = default;
  /// Builds from an undirected edge list; parallel edges are summed and
  /// self-loops (u == v) contribute 2 * weight to self_weight.
  WeightedGraph(std::size_t vertex_count, std::span<const Edge> edges);

  static WeightedGraph from_term_graph(const TermGraph& graph);

  std::size_t size() const noexcept { return degree_.size(); }
  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::span<const double> weights(std::uint32_t v) const {
    return {weights_.data() + offsets_[v], weights_.data() + offsets_[v + 1]};
  }
  double self_weight(std::uint32_t v) const { return self_weight_[v]; }
  /// K_v: sum of incident weights including self_weight.
  double degree(std::uint32_t v) const { return degree_[v]; }
  /// 2M
  double total_degree() const noexcept { return total_degree_; }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

  /// Builds the quotient graph whose vertices are the groups of `membership`
  /// (labels dense in [0, groups)).
  WeightedGraph aggregate(std::span<const std::uint32_t> membership, std::size_t groups) const;

 private:
  void finish();

  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> neighbors_;
  std::vector<double> weights_;
  std::vector<double> self_weight_;
  std::vector<double> degree_;
  double total_degree_ = 0;
};

}  // namespace termweave
