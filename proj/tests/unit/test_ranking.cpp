#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "termweave/error.hpp"
#include "termweave/ranking.hpp"

using namespace termweave;

namespace {

// Builds a one-document corpus from whitespace-free single-letter terms.
Corpus corpus_of(const std::vector<std::string>& docs) {
  std::vector<AnnotatedDocument> annotated;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    AnnotatedDocument doc;
    doc.doc_id = "d" + std::to_string(d);
    for (char c : docs[d]) {
      AnnotatedToken t;
      t.lemma = std::string(1, c);
      t.position = static_cast<std::uint32_t>(doc.tokens.size());
      bool seen = false;
      for (const auto& u : doc.unique_terms) seen = seen || u.lemma == t.lemma;
      if (!seen) doc.unique_terms.push_back({t.lemma, t.position});
      doc.tokens.push_back(t);
    }
    annotated.push_back(std::move(doc));
  }
  return index_corpus(annotated);
}

std::uint32_t f(const DocTermGraph& g, const Corpus& c, const std::string& s, const std::string& t) {
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < g.terms.size(); ++i) {
    if (g.terms[i] == c.vocabulary.id(s)) a = i;
    if (g.terms[i] == c.vocabulary.id(t)) b = i;
  }
  return g.count(a, b);
}

}  // namespace

TEST_CASE("idf") {
  CHECK(idf_value(0, 100, 1e-6) == doctest::Approx(std::log(100.0)).epsilon(1e-12));
  CHECK(idf_value(0, 100, 1e-6) == doctest::Approx(4.6052).epsilon(1e-4));
  CHECK(idf_value(9, 10, 1e-6) == 1e-6);
  // log(2225 / 86)
  CHECK(idf_value(85, 2225, 1e-6) == doctest::Approx(3.253164898346833).epsilon(1e-12));
  const auto c = corpus_of({"ab", "a"});
  CHECK(idf(c.vocabulary.id("b"), c.vocabulary, 2) == doctest::Approx(0.0 + 1e-6));
  CHECK_THROWS_AS(idf(99, c.vocabulary, 2), NotFoundError);
}

TEST_CASE("window co-occurrence counts") {
  SUBCASE("repeated term") {
    const auto c = corpus_of({"aba"});
    const auto g = build_doc_term_graph(c.documents[0], 5);
    CHECK(f(g, c, "a", "b") == 2);
    CHECK(f(g, c, "b", "a") == 2);
    CHECK(f(g, c, "a", "a") == 0);
  }
  SUBCASE("window boundary") {
    const auto c = corpus_of({"axxxxb"});
    const auto g = build_doc_term_graph(c.documents[0], 5);
    CHECK(f(g, c, "a", "b") == 0);
    CHECK(f(g, c, "a", "x") == 4);
  }
  SUBCASE("adjacent pairs only") {
    const auto c = corpus_of({"abca"});
    const auto g = build_doc_term_graph(c.documents[0], 2);
    CHECK(f(g, c, "a", "b") == 1);
    CHECK(f(g, c, "b", "c") == 1);
    CHECK(f(g, c, "c", "a") == 1);
  }
  CHECK_THROWS_AS(build_doc_term_graph(corpus_of({"ab"}).documents[0], 1), DataError);
}

TEST_CASE("single term document has rank one") {
  const auto c = corpus_of({"a", "b"});
  const auto r = rank_document(c.documents[0], c.vocabulary, 2, {}, {});
  REQUIRE(r.r.size() == 1);
  CHECK(r.r[0] == 1.0);
}

TEST_CASE("two-term chain matches its dense solution") {
  // terms at positions 0 and 1, f = 1, equal idf
  const auto c = corpus_of({"ab"});
  const auto g = build_doc_term_graph(c.documents[0], 5);
  const std::vector<double> idf{1.0, 1.0};
  const auto pi = pos_idf_rank(g, idf, {});
  CHECK(pi[0] == doctest::Approx(0.51225051).epsilon(1e-7));
  CHECK(pi[1] == doctest::Approx(0.48774949).epsilon(1e-7));
}

TEST_CASE("non-convergence reports the residual") {
  const auto c = corpus_of({"abcab"});
  const auto g = build_doc_term_graph(c.documents[0], 5);
  RankParams p;
  p.max_iter = 2;
  const std::vector<double> idf{1.0, 2.0, 3.0};
  try {
    pos_idf_rank(g, idf, p);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > p.tol);
  }
}

TEST_CASE("parameter validation") {
  RankParams p;
  p.beta = 0.5;
  CHECK_THROWS_AS(p.validate(), DataError);
  p = {};
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), DataError);
  DiscretizeParams d{2, 3};
  CHECK_THROWS_AS(d.validate(), DataError);
}

TEST_CASE("discretized level sets") {
  auto counts = [](const std::vector<std::uint8_t>& q) {
    std::array<int, 4> c{};
    for (auto v : q) ++c[v];
    return c;
  };
  const DiscretizeParams params;
  const auto q40 = discretize(40, params);
  CHECK(q40[0] == 3);
  CHECK(q40[1] == 3);
  CHECK(q40[2] == 2);
  CHECK(q40[5] == 1);
  CHECK(q40[6] == 0);
  CHECK(counts(q40) == std::array<int, 4>{34, 2, 2, 2});
  CHECK(counts(discretize(10, params)) == std::array<int, 4>{10, 0, 0, 0});
  CHECK(counts(discretize(60, params)) == std::array<int, 4>{51, 3, 3, 3});
  for (std::size_t m = 0; m < 200; ++m) {
    const auto c = counts(discretize(m, params));
    const int part = static_cast<int>(m / 20);
    CHECK(c[1] == part);
    CHECK(c[2] == part);
    CHECK(c[3] == part);
  }
}

TEST_CASE("bayesian average") {
  CHECK(bayesian_average(5, 0.3, 3, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(bayesian_average(5, 0.3, 0, 10) == doctest::Approx(0.1).epsilon(1e-15));
  // strictly decreasing in Df whenever the per-document mean exceeds L
  for (double q = 1; q <= 30; q += 1) {
    for (double df = 1; df < 20; df += 1) {
      if (q / df > 0.3) CHECK(bayesian_average(5, 0.3, q, df + 1) < bayesian_average(5, 0.3, q, df));
    }
  }
}

TEST_CASE("corpus ranking prior") {
  std::vector<std::string> docs;
  for (int i = 0; i < 30; ++i) docs.push_back("abcdefghijklmnopqrstuvwxyz" + std::string(i % 3 + 1, 'A' + i % 5));
  const auto c = corpus_of(docs);
  const auto rankings = rank_documents(c, {}, {}, 2);
  const auto cr = corpus_rank(rankings, c.vocabulary, {});
  CHECK(cr.prior_mean == doctest::Approx(0.3).epsilon(1e-15));
  double df_sum = 0;
  for (auto d : c.vocabulary.dfs()) df_sum += d;
  CHECK(cr.prior_weight == doctest::Approx(df_sum / c.vocabulary.size()));
  for (TermId t = 0; t < c.vocabulary.size(); ++t) {
    CHECK(cr.r[t] > 0);
    CHECK(cr.r[t] == doctest::Approx((cr.prior_weight * 0.3 + cr.q_sum[t]) / (cr.prior_weight + c.vocabulary.df(t))));
  }
  // threaded and sequential ranking agree exactly
  const auto single = rank_documents(c, {}, {}, 1);
  for (std::size_t d = 0; d < single.size(); ++d) CHECK(single[d].r == rankings[d].r);
}

TEST_CASE("property: transition rows are stochastic and power iteration matches the dense solve") {
  std::mt19937_64 rng(2024);
  RankParams params;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 1 + rng() % 40;
    const std::size_t len = m + rng() % 60;
    std::vector<std::uint32_t> seq;
    for (std::size_t i = 0; i < m; ++i) seq.push_back(static_cast<std::uint32_t>(i));
    for (std::size_t i = m; i < len; ++i) seq.push_back(static_cast<std::uint32_t>(rng() % m));
    std::shuffle(seq.begin(), seq.end(), rng);
    // relabel by first occurrence so local index == unique-term order
    std::vector<int> map(m, -1);
    int next = 0;
    for (auto& s : seq) {
      if (map[s] < 0) map[s] = next++;
      s = static_cast<std::uint32_t>(map[s]);
    }
    std::string text;
    for (auto s : seq) text.push_back(static_cast<char>(s < 26 ? 'a' + s : 'A' + (s - 26)));
    const auto c = corpus_of({text});
    params.window = 2 + rng() % 6;
    const auto g = build_doc_term_graph(c.documents[0], params.window);
    REQUIRE(g.size() == m);
    std::vector<double> idf(m);
    for (auto& v : idf) v = 0.1 + static_cast<double>(rng() % 1000) / 250.0;

    const auto p = transition_matrix(g, idf, params);
    for (std::size_t s = 0; s < m; ++s) {
      double row = 0;
      for (std::size_t t = 0; t < m; ++t) row += p[s * m + t];
      CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
    }
    const auto pi = pos_idf_rank(g, idf, params);
    if (m == 1) continue;
    const auto oracle = termweave::testing::dense_stationary(seq, idf, params.alpha, params.beta, params.window);
    double linf = 0;
    for (std::size_t t = 0; t < m; ++t) linf = std::max(linf, std::abs(pi[t] - oracle[t]));
    CHECK(linf < 1e-6);
    CHECK(std::accumulate(pi.begin(), pi.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}
