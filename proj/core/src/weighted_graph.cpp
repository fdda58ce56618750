#include "termweave/weighted_graph.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "termweave/error.hpp"
#include "termweave/graph.hpp"

namespace termweave {

WeightedGraph::WeightedGraph(std::size_t vertex_count, std::span<const Edge> edges) {
  self_weight_.assign(vertex_count, 0.0);
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    if (e.u >= vertex_count || e.v >= vertex_count) throw DataError("edge endpoint out of range");
    if (!(e.weight >= 0.0)) throw DataError("edge weights must be non-negative");
    if (e.u == e.v) {
      self_weight_[e.u] += 2.0 * e.weight;
      continue;
    }
    directed.emplace_back(e.u, e.v, e.weight);
    directed.emplace_back(e.v, e.u, e.weight);
  }
  std::sort(directed.begin(), directed.end(),
            [](const auto& a, const auto& b) { return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b)); });
  offsets_.assign(vertex_count + 1, 0);
  for (std::size_t k = 0; k < directed.size();) {
    const auto [u, v, w] = directed[k];
    double sum = 0;
    std::size_t e = k;
    while (e < directed.size() && std::get<0>(directed[e]) == u && std::get<1>(directed[e]) == v) {
      sum += std::get<2>(directed[e]);
      ++e;
    }
    neighbors_.push_back(v);
    weights_.push_back(sum);
    ++offsets_[u + 1];
    k = e;
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  finish();
}

WeightedGraph WeightedGraph::from_term_graph(const TermGraph& graph) {
  WeightedGraph g;
  const std::size_t n = graph.vertex_count();
  g.offsets_.assign(graph.offsets.begin(), graph.offsets.end());
  g.neighbors_ = graph.neighbors;
  g.weights_.assign(graph.weights.begin(), graph.weights.end());
  g.self_weight_.assign(n, 0.0);
  g.finish();
  return g;
}

void WeightedGraph::finish() {
  const std::size_t n = self_weight_.size();
  degree_.assign(n, 0.0);
  total_degree_ = 0;
  for (std::size_t v = 0; v < n; ++v) {
    double k = self_weight_[v];
    for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) k += weights_[e];
    degree_[v] = k;
    total_degree_ += k;
  }
}

WeightedGraph WeightedGraph::aggregate(std::span<const std::uint32_t> membership, std::size_t groups) const {
  WeightedGraph out;
  out.self_weight_.assign(groups, 0.0);
  out.offsets_.assign(groups + 1, 0);

  std::vector<std::vector<std::uint32_t>> members(groups);
  for (std::uint32_t v = 0; v < size(); ++v) members[membership[v]].push_back(v);

  // sparse accumulator over target groups
  std::vector<double> acc(groups, 0.0);
  std::vector<char> touched_flag(groups, 0);
  std::vector<std::uint32_t> touched;
  for (std::uint32_t c = 0; c < groups; ++c) {
    touched.clear();
    for (auto v : members[c]) {
      out.self_weight_[c] += self_weight_[v];
      for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
        const auto d = membership[neighbors_[e]];
        if (d == c) {
          out.self_weight_[c] += weights_[e];  // each internal edge seen from both ends
          continue;
        }
        if (!touched_flag[d]) {
          touched_flag[d] = 1;
          touched.push_back(d);
        }
        acc[d] += weights_[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto d : touched) {
      out.neighbors_.push_back(d);
      out.weights_.push_back(acc[d]);
      acc[d] = 0.0;
      touched_flag[d] = 0;
    }
    out.offsets_[c + 1] = out.neighbors_.size();
  }
  out.finish();
  return out;
}

}  // namespace termweave
