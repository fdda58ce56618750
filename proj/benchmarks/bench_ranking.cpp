#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <string>

#include "termweave/ranking.hpp"

namespace {

termweave::Corpus random_corpus(std::size_t docs, std::size_t length, std::size_t vocabulary) {
  std::mt19937_64 rng(1);
  std::vector<termweave::AnnotatedDocument> annotated(docs);
  for (std::size_t d = 0; d < docs; ++d) {
    auto& doc = annotated[d];
    doc.doc_id = "d" + std::to_string(d);
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < length; ++i) {
      termweave::AnnotatedToken t;
      t.lemma = "w" + std::to_string(rng() % vocabulary);
      t.position = static_cast<std::uint32_t>(i);
      if (std::find(seen.begin(), seen.end(), t.lemma) == seen.end()) {
        seen.push_back(t.lemma);
        doc.unique_terms.push_back({t.lemma, t.position});
      }
      doc.tokens.push_back(std::move(t));
    }
  }
  return termweave::index_corpus(annotated);
}

}  // namespace

static void BM_PosIdfRankDocument(benchmark::State& state) {
  const auto corpus = random_corpus(1, static_cast<std::size_t>(state.range(0)), 5000);
  const termweave::RankParams params;
  const termweave::DiscretizeParams levels;
  for (auto _ : state) {
    benchmark::DoNotOptimize(termweave::rank_document(corpus.documents[0], corpus.vocabulary, 2225, params, levels));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PosIdfRankDocument)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_RankCorpus(benchmark::State& state) {
  const auto corpus = random_corpus(static_cast<std::size_t>(state.range(0)), 400, 20000);
  for (auto _ : state) {
    const auto rankings = termweave::rank_documents(corpus, {}, {}, 1);
    benchmark::DoNotOptimize(termweave::corpus_rank(rankings, corpus.vocabulary, {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankCorpus)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
