#include <benchmark/benchmark.h>

#include <random>

#include "termweave/presentation.hpp"

static void BM_WardClusters(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> points(static_cast<std::size_t>(state.range(0)), std::vector<double>(300));
  for (auto& p : points) {
    for (auto& x : p) x = normal(rng) * 0.1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(termweave::agglomerative_clusters(points, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WardClusters)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared)
    ->Unit(benchmark::kMillisecond);

static void BM_Coherence(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  termweave::Vocabulary vocab;
  termweave::EmbeddingTable table;
  table.dimension = 300;
  std::vector<termweave::TermId> terms;
  std::vector<double> r;
  for (int i = 0; i < state.range(0); ++i) {
    const std::string word = "w" + std::to_string(i);
    terms.push_back(vocab.intern(word));
    std::vector<float> v(300);
    for (auto& x : v) x = static_cast<float>(normal(rng));
    table.vectors[word] = std::move(v);
    r.push_back(0.5);
  }
  for (auto _ : state) benchmark::DoNotOptimize(termweave::coherence(0, terms, vocab, r, table));
}
BENCHMARK(BM_Coherence)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
