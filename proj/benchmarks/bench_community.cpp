#include <benchmark/benchmark.h>

#include <random>

#include "termweave/community.hpp"

namespace {

// planted partition: blocks of 50 vertices, dense inside, sparse across
termweave::WeightedGraph planted_graph(std::size_t vertices) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<termweave::WeightedGraph::Edge> edges;
  for (std::uint32_t i = 0; i < vertices; ++i) {
    for (std::uint32_t j = i + 1; j < vertices; ++j) {
      const bool same = i / 50 == j / 50;
      if (u(rng) < (same ? 0.3 : 0.01)) edges.push_back({i, j, 1.0 + static_cast<double>(rng() % 5)});
    }
  }
  return termweave::WeightedGraph(vertices, edges);
}

}  // namespace

static void BM_Leiden(benchmark::State& state) {
  const auto g = planted_graph(static_cast<std::size_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(termweave::leiden(g, 1.0, seed++));
  state.counters["edges"] = static_cast<double>(g.edge_count());
}
BENCHMARK(BM_Leiden)->Arg(500)->Arg(2000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_Modularity(benchmark::State& state) {
  const auto g = planted_graph(2000);
  std::vector<std::uint32_t> labels(g.size());
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = static_cast<std::uint32_t>(v / 50);
  const auto p = termweave::Partition::from_labels(labels);
  for (auto _ : state) benchmark::DoNotOptimize(termweave::modularity(g, p, 1.0));
}
BENCHMARK(BM_Modularity);

static void BM_DetectGroups(benchmark::State& state) {
  const auto g = planted_graph(2000);
  termweave::DetectParams params;
  for (auto _ : state) benchmark::DoNotOptimize(termweave::detect_groups(g, params, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_DetectGroups)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
