// Acceptance gate. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "planted.hpp"
#include "tempdir.hpp"
#include "termweave/analytics.hpp"
#include "termweave/community.hpp"
#include "termweave/graph.hpp"
#include "termweave/pipeline.hpp"
#include "termweave/presentation.hpp"
#include "termweave/ranking.hpp"

using namespace termweave;
namespace tt = termweave::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  enum class State { Pass, Fail, Skip } state = State::Pass;
  std::string detail;
};

Outcome pass(std::string detail) { return {Outcome::State::Pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Outcome::State::Fail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Outcome::State::Skip, std::move(detail)}; }

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1. brute-force modularity oracle

Outcome criterion_1() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  const double gammas[] = {0.5, 1.0, 2.0};
  int exact[3] = {0, 0, 0};
  double worst_ratio = 1.0;
  bool below = false;
  for (int g = 0; g < 20; ++g) {
    const std::size_t n = 3 + rng() % 6;
    const double density = 0.3 + 0.5 * static_cast<double>(rng() % 100) / 100.0;
    auto a = tt::random_weighted_graph(n, density, rng);
    // make sure the graph has at least one edge
    if (tt::to_graph(a).total_degree() == 0) a[0][1] = a[1][0] = 1;
    const auto graph = tt::to_graph(a);
    for (int k = 0; k < 3; ++k) {
      const auto best = tt::best_partition(a, gammas[k]);
      double found = -std::numeric_limits<double>::infinity();
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        found = std::max(found, modularity(graph, leiden(graph, gammas[k], seed).partition, gammas[k]));
      }
      if (found >= best.quality - 1e-9) ++exact[k];
      // Q* may be negative at gamma=2 on dense graphs; the 95% bound is taken on |Q*|
      const double floor = best.quality - 0.05 * std::abs(best.quality);
      if (found < floor - 1e-12) below = true;
      if (best.quality > 0) worst_ratio = std::min(worst_ratio, found / best.quality);
    }
  }
  const double t = seconds_since(start);
  std::string detail = "exact hits " + std::to_string(exact[0]) + "/20, " + std::to_string(exact[1]) + "/20, " +
                       std::to_string(exact[2]) + "/20 (gamma 0.5, 1, 2); worst Q/Q* " + fmt(worst_ratio, 4) +
                       "; " + fmt(t, 2) + " s";
  const bool ok = exact[0] >= 18 && exact[1] >= 18 && exact[2] >= 18 && !below && t < 10.0;
  return ok ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// 2. two triangles

Outcome criterion_2() {
  tt::Matrix bridged(6, std::vector<double>(6, 0.0));
  auto edge = [](tt::Matrix& m, int i, int j) { m[i][j] = m[j][i] = 1; };
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}) edge(bridged, i, j);
  auto plain = bridged;
  edge(bridged, 2, 3);

  const std::vector<std::uint32_t> triangles{0, 0, 0, 1, 1, 1};
  bool split = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = leiden(tt::to_graph(bridged), 1.0, seed);
    split = split && tt::canonical(r.partition.membership) == triangles;
  }
  const double q = modularity(tt::to_graph(plain), Partition::from_labels(triangles), 1.0);
  const double q_oracle = tt::dense_modularity(plain, triangles, 1.0);
  const std::string detail = std::string("leiden split ") + (split ? "= triangles" : "!= triangles") +
                             " (10 seeds); Q(bridgeless) = " + fmt(q, 15) + ", dense oracle " + fmt(q_oracle, 15);
  return split && std::abs(q - 0.5) <= 1e-12 && std::abs(q_oracle - 0.5) <= 1e-12 ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// planted corpus shared by 3 and 4

struct PlantedSetup {
  tt::PlantedCorpus planted;
  Corpus corpus;
  std::vector<DocRanking> rankings;
  TermGraph graph;
};

const PlantedSetup& planted_setup() {
  static const PlantedSetup setup = [] {
    PlantedSetup s;
    s.planted = tt::make_planted_corpus(tt::PlantedParams{});
    const auto config = load_annotation_config({}, {}, {}, true);
    const auto annotated = annotate_all(s.planted.documents, config);
    s.corpus = index_corpus(annotated);
    s.rankings = rank_documents(s.corpus, RankParams{}, DiscretizeParams{});
    s.graph = build_corpus_graph(s.corpus, s.rankings, 100.0);
    return s;
  }();
  return setup;
}

DetectParams planted_params(double gamma, std::uint64_t seed) {
  DetectParams p;
  p.gamma = gamma;
  p.n_rep = 20;
  p.n_con = 15;
  p.seed = seed;
  return p;
}

// ---------------------------------------------------------------------------
// 3. planted topic recovery

Outcome criterion_3() {
  const auto start = Clock::now();
  const auto& s = planted_setup();
  const auto topics = detect_topics(s.graph, planted_params(1.0, 0));
  const double t = seconds_since(start);

  // term agreement over the planted topic terms; unassigned terms are singletons
  std::vector<std::int64_t> truth, found;
  const TopicLookup lookup(topics);
  std::int64_t next_singleton = 1000000;
  std::vector<std::map<int, int>> votes(topics.topics.size());
  for (const auto& [term, topic] : s.planted.topic_of_term) {
    const auto id = s.corpus.vocabulary.find(term);
    if (!id) continue;
    truth.push_back(topic);
    const auto assigned = lookup.topic_of(*id);
    found.push_back(assigned ? static_cast<std::int64_t>(*assigned) : next_singleton++);
    if (assigned) ++votes[*assigned][topic];
  }
  const double ari = adjusted_rand_index(truth, found);

  // majority planted topic of every detected topic
  std::vector<int> mapped(topics.topics.size(), -1);
  for (std::size_t i = 0; i < votes.size(); ++i) {
    int best = 0;
    for (const auto& [topic, count] : votes[i]) {
      if (count > best) {
        best = count;
        mapped[i] = topic;
      }
    }
  }
  std::size_t correct = 0;
  for (std::size_t d = 0; d < s.corpus.documents.size(); ++d) {
    const auto seq = reduce_document(s.corpus.documents[d], s.rankings[d], 100.0);
    const auto shares = topic_shares(s.corpus.documents[d].doc_id, seq, lookup);
    if (shares.dominant && mapped[*shares.dominant] == s.planted.topic_of_document[d]) ++correct;
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(s.corpus.documents.size());

  const std::string detail = std::to_string(topics.topics.size()) + " topics, ARI " + fmt(ari, 4) +
                             ", document accuracy " + fmt(accuracy, 4) + ", detection " + fmt(t, 2) + " s";
  const bool ok = topics.topics.size() == 4 && ari >= 0.9 && accuracy >= 0.95 && t < 60.0;
  return ok ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// 4. resolution monotonicity

Outcome criterion_4() {
  const auto& s = planted_setup();
  const double gammas[] = {0.5, 1.0, 2.0, 4.0};
  std::vector<double> medians;
  for (double gamma : gammas) {
    std::vector<std::size_t> counts;
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      counts.push_back(detect_topics(s.graph, planted_params(gamma, 1000 * rep)).topics.size());
    }
    std::sort(counts.begin(), counts.end());
    medians.push_back(static_cast<double>(counts[2]));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < medians.size(); ++i) monotone = monotone && medians[i] >= medians[i - 1];
  std::string detail = "median topic counts";
  for (std::size_t i = 0; i < medians.size(); ++i) {
    detail += (i ? ", " : " ") + std::string("gamma ") + fmt(gammas[i], 1) + ": " + fmt(medians[i], 0);
  }
  return monotone && medians[1] >= 4 ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// 5. posIdfRank against the dense solve

Outcome criterion_5() {
  std::mt19937_64 rng(5150);
  double worst = 0, worst_sum = 0;
  RankParams params;
  for (int doc = 0; doc < 50; ++doc) {
    const std::size_t m = 2 + rng() % 49;
    const std::size_t len = m + rng() % (2 * m);
    std::vector<std::uint32_t> seq;
    for (std::size_t i = 0; i < m; ++i) seq.push_back(static_cast<std::uint32_t>(i));
    for (std::size_t i = m; i < len; ++i) seq.push_back(static_cast<std::uint32_t>(rng() % m));
    std::shuffle(seq.begin(), seq.end(), rng);
    std::vector<int> relabel(m, -1);
    int next = 0;
    for (auto& x : seq) {
      if (relabel[x] < 0) relabel[x] = next++;
      x = static_cast<std::uint32_t>(relabel[x]);
    }

    AnnotatedDocument annotated;
    annotated.doc_id = "d" + std::to_string(doc);
    for (auto x : seq) {
      AnnotatedToken token;
      token.lemma = "term" + std::to_string(x);
      token.position = static_cast<std::uint32_t>(annotated.tokens.size());
      if (x == annotated.unique_terms.size()) annotated.unique_terms.push_back({token.lemma, token.position});
      annotated.tokens.push_back(std::move(token));
    }
    const std::vector<AnnotatedDocument> docs{annotated};
    const auto corpus = index_corpus(docs);
    params.window = 2 + rng() % 7;
    const auto graph = build_doc_term_graph(corpus.documents[0], params.window);
    std::vector<double> idf(m);
    for (auto& v : idf) v = 0.05 + static_cast<double>(rng() % 1000) / 200.0;

    const auto pi = pos_idf_rank(graph, idf, params);
    const auto oracle = tt::dense_stationary(seq, idf, params.alpha, params.beta, params.window);
    for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(pi[i] - oracle[i]));
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(pi.begin(), pi.end(), 0.0) - 1.0));
  }
  const std::string detail =
      "max L-inf deviation " + sci(worst) + ", max |sum - 1| " + sci(worst_sum) + " over 50 documents";
  return worst <= 1e-6 && worst_sum <= 1e-9 ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// 6. published classification tables

CrossTable table_of(std::vector<std::vector<std::uint32_t>> counts) {
  CrossTable t;
  t.classes = {"Business", "Entertainment", "Politics", "Sport", "Tech"};
  t.topics = {"Economy", "Music & Films", "Politics", "Sports", "Technology"};
  t.counts = std::move(counts);
  return t;
}

Outcome criterion_6() {
  const auto a = classification_stats(table_of({{473, 4, 18, 3, 12},
                                                {7, 346, 12, 3, 18},
                                                {18, 1, 396, 0, 2},
                                                {1, 1, 1, 507, 1},
                                                {5, 4, 11, 3, 378}}));
  const auto b = classification_stats(table_of({{491, 1, 12, 0, 6},
                                                {8, 354, 12, 0, 12},
                                                {12, 0, 402, 2, 1},
                                                {2, 0, 2, 507, 0},
                                                {12, 7, 6, 6, 370}}));
  const auto& business = a.classes[0];
  const bool ok = std::abs(business.precision - 0.938) <= 1e-3 && std::abs(business.recall - 0.927) <= 1e-3 &&
                  std::abs(business.f1 - 0.933) <= 1e-3 && std::abs(a.weighted.f1 - 0.944) <= 1e-3 &&
                  std::abs(b.weighted.f1 - 0.955) <= 1e-3;
  const std::string detail = "Business P/R/F1 " + fmt(business.precision, 4) + "/" + fmt(business.recall, 4) + "/" +
                             fmt(business.f1, 4) + ", weighted f1 " + fmt(a.weighted.f1, 4) + " and " +
                             fmt(b.weighted.f1, 4);
  return ok ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// 7. formula unit suite

Outcome criterion_7() {
  std::vector<std::string> failures;
  int checks = 0;
  auto expect = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  };
  expect(std::abs(idf_value(0, 100, 1e-6) - std::log(100.0)) <= 1e-12, "idf N=100 Df=0");
  expect(idf_value(9, 10, 1e-6) == 1e-6, "idf clamp");
  expect(std::abs(idf_value(85, 2225, 1e-6) - 3.253164898346833) <= 1e-12, "idf N=2225 Df=85");

  auto level_counts = [](std::size_t m) {
    std::vector<std::size_t> counts(4, 0);
    for (auto q : discretize(m, DiscretizeParams{})) ++counts[q];
    return counts;
  };
  expect(level_counts(40) == std::vector<std::size_t>{34, 2, 2, 2}, "levels m=40");
  expect(level_counts(10) == std::vector<std::size_t>{10, 0, 0, 0}, "levels m=10");
  expect(level_counts(60) == std::vector<std::size_t>{51, 3, 3, 3}, "levels m=60");

  expect(std::abs(bayesian_average(5, 0.3, 3, 1) - 0.75) <= 1e-12, "bayesian 0.75");
  expect(std::abs(bayesian_average(5, 0.3, 0, 10) - 0.1) <= 1e-12, "bayesian 0.1");

  tt::Matrix tri(6, std::vector<double>(6, 0.0));
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}) tri[i][j] = tri[j][i] = 1;
  expect(std::abs(modularity(tt::to_graph(tri), Partition::whole(6), 1.0)) <= 1e-15, "Q whole graph");

  Vocabulary vocab;
  const std::vector<TermId> terms{vocab.intern("x"), vocab.intern("y")};
  const std::vector<double> r{0.5, 0.5};
  EmbeddingTable same, orthogonal;
  same.dimension = orthogonal.dimension = 2;
  same.vectors = {{"x", {1.0f, 2.0f}}, {"y", {1.0f, 2.0f}}};
  orthogonal.vectors = {{"x", {1.0f, 0.0f}}, {"y", {0.0f, 4.0f}}};
  const auto c_same = coherence(0, terms, vocab, r, same).coherence;
  const auto c_orth = coherence(0, terms, vocab, r, orthogonal).coherence;
  expect(c_same && std::abs(*c_same - 1.0) <= 1e-12, "c_emb identical");
  expect(c_orth && std::abs(*c_orth) <= 1e-12, "c_emb orthogonal");

  if (failures.empty()) {
    return pass("idf, level sets, Bayesian average, Q, c_emb: " + std::to_string(checks) + " checks exact");
  }
  std::string detail = "failed:";
  for (const auto& f : failures) detail += " [" + f + "]";
  return fail(detail);
}

// ---------------------------------------------------------------------------
// 8. determinism of the full pipeline

Outcome criterion_8() {
  tt::TempDir dir;
  tt::PlantedParams params;
  params.docs_per_topic = 60;
  const auto planted = tt::make_planted_corpus(params);
  const auto corpus = dir.write("corpus.jsonl", tt::to_jsonl(planted.documents));

  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::ostringstream vectors;
  vectors << planted.topic_of_term.size() << " 8\n";
  std::vector<std::pair<std::string, int>> ordered(planted.topic_of_term.begin(), planted.topic_of_term.end());
  std::sort(ordered.begin(), ordered.end());
  for (const auto& [term, topic] : ordered) {
    vectors << term;
    for (int k = 0; k < 8; ++k) vectors << ' ' << (k == topic ? 2.0 : 0.0) + 0.4 * normal(rng);
    vectors << '\n';
  }
  const auto vector_file = dir.write("vectors.txt", vectors.str());

  std::vector<std::string> topics_bytes, sheets_bytes, sheets_csv;
  for (const char* name : {"first", "second"}) {
    auto project = Project::init(dir / name);
    Config config;
    config.graph.reduction = 100;
    config.presentation.vectors = vector_file;
    Workspace ws(project, config);
    ws.ingest(corpus, CorpusFormat::Jsonl);
    ws.rank();
    ws.graph();
    const auto run = ws.detect(config.detect).artifact;
    const auto sheets = ws.sheets(run).artifact;
    topics_bytes.push_back(read_file(dir / name / "runs" / run / "topics.json"));
    sheets_bytes.push_back(project.load_artifact(sheets));
    sheets_csv.push_back(read_file(dir / name / "sheets" / (run + ".csv")));
  }
  const bool same_topics = topics_bytes[0] == topics_bytes[1];
  const bool same_sheets = sheets_bytes[0] == sheets_bytes[1] && sheets_csv[0] == sheets_csv[1];
  const std::string detail = std::string("topics.json ") + (same_topics ? "identical" : "differs") + " (" +
                             std::to_string(topics_bytes[0].size()) + " bytes), sheets " +
                             (same_sheets ? "identical" : "differ") + " (" + std::to_string(sheets_bytes[0].size()) +
                             " bytes)";
  return same_topics && same_sheets ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// 9. reference-scale corpus, only when the data is supplied

Outcome criterion_9() {
  const char* corpus_env = std::getenv("TERMWEAVE_BBC_CORPUS");
  const char* vectors_env = std::getenv("TERMWEAVE_BBC_VECTORS");
  if (!corpus_env || !vectors_env) {
    return skip("set TERMWEAVE_BBC_CORPUS and TERMWEAVE_BBC_VECTORS to run the reference-corpus check");
  }
  const auto start = Clock::now();
  tt::TempDir dir;
  auto project = Project::init(dir / "bbc");
  Config config;
  config.graph.reduction = 50;
  config.detect.gamma = 0.8;
  config.presentation.vectors = std::filesystem::path(vectors_env);
  Workspace ws(project, config);
  const std::filesystem::path source(corpus_env);
  ws.ingest(source, std::filesystem::is_directory(source) ? CorpusFormat::TxtDir : CorpusFormat::Jsonl);
  ws.rank();
  ws.graph();
  const auto run = ws.detect(config.detect).artifact;
  ws.sheets(run);
  const auto info = ws.run_info(run);
  const auto e = ws.evaluate(run);
  const double t = seconds_since(start);
  const std::string detail = std::to_string(info.topic_count) + " topics, weighted f1 " +
                             fmt(e.stats.weighted.f1, 4) + ", " + fmt(t, 1) + " s";
  return info.topic_count == 5 && e.stats.weighted.f1 >= 0.85 && t < 900.0 ? pass(detail) : fail(detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"modularity oracle on small random graphs", criterion_1},
      {"two-triangle bridge graph", criterion_2},
      {"planted-topic recovery", criterion_3},
      {"resolution monotonicity", criterion_4},
      {"posIdfRank against dense solve", criterion_5},
      {"published classification statistics", criterion_6},
      {"formula unit suite", criterion_7},
      {"pipeline determinism", criterion_8},
      {"reference corpus reproduction", criterion_9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const char* label = outcome.state == Outcome::State::Pass   ? "PASS"
                        : outcome.state == Outcome::State::Skip ? "SKIP"
                                                                : "FAIL";
    if (outcome.state == Outcome::State::Fail) ++failed;
    std::cout << label << " criterion " << i + 1 << " (" << criteria[i].first << "): " << outcome.detail << std::endl;
  }
  std::cout << (failed == 0 ? "acceptance: all criteria met" : "acceptance: " + std::to_string(failed) + " failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
