#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "termweave/ingest.hpp"

namespace termweave {

struct RankParams {
  double alpha = 0.85;      // weight of the neighbourhood walk vs. the positional jump
  double beta = -0.9;       // exponent on (1 + first position)
  std::size_t window = 5;   // co-occurrence window w
  double idf_floor = 1e-6;
  double tol = 1e-10;       // L1 change between power-iteration steps
  std::size_t max_iter = 500;

  void validate() const;
};

/// Discretization of document rankings into levels 0..levels.
struct DiscretizeParams {
  std::size_t parts = 20;   // A
  std::size_t levels = 3;   // K

  void validate() const;
};

/// max(log(N / (1 + df)), floor)
double idf_value(std::uint32_t df, std::size_t corpus_size, double floor);
double idf(TermId term, const Vocabulary& vocabulary, std::size_t corpus_size, double floor = 1e-6);

/// Windowed co-occurrence graph of one document. Local vertex i stands for
/// terms[i]; vertices are ordered by first appearance.
struct DocTermGraph {
  std::string doc_id;
  std::vector<TermId> terms;
  std::vector<std::uint32_t> first_position;
  std::size_t window = 5;
  // symmetric CSR over local indices, neighbours ascending
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> neighbors;
  std::vector<std::uint32_t> counts;

  std::size_t size() const noexcept { return terms.size(); }
  /// f_st for local vertices s, t.
  std::uint32_t count(std::size_t s, std::size_t t) const;
};

/// Counts, for every pair of token positions i < j with j - i <= window - 1
/// and distinct terms, one co-occurrence of the two terms.
DocTermGraph build_doc_term_graph(const IndexedDocument& doc, std::size_t window);

/// Dense row-major transition matrix P over the graph's local vertices.
std::vector<double> transition_matrix(const DocTermGraph& graph, std::span<const double> idf_values,
                                      const RankParams& params);

/// Stationary distribution of the posIdfRank chain by power iteration.
/// Vertices without co-occurrences send their whole mass through the
/// positional jump. Throws ConvergenceError after max_iter steps.
std::vector<double> pos_idf_rank(const DocTermGraph& graph, std::span<const double> idf_values,
                                 const RankParams& params);

/// Per-document ranking sorted by descending r_d, ties by ascending term id.
struct DocRanking {
  std::string doc_id;
  std::vector<TermId> terms;
  std::vector<double> r;
  std::vector<std::uint8_t> q;
};

/// Level per rank slot: the top floor(m/A) slots get K, the next K-1, ... and
/// everything after the K-th part gets 0.
std::vector<std::uint8_t> discretize(std::size_t term_count, const DiscretizeParams& params);

DocRanking rank_document(const IndexedDocument& doc, const Vocabulary& vocabulary, std::size_t corpus_size,
                         const RankParams& params, const DiscretizeParams& levels);

std::vector<DocRanking> rank_documents(const Corpus& corpus, const RankParams& params,
                                       const DiscretizeParams& levels, unsigned threads = 0);

struct CorpusRanking {
  std::vector<double> r;            // indexed by term id
  std::vector<std::uint32_t> q_sum; // sum of q_d(t) over documents containing t
  double prior_weight = 0;          // C: mean document frequency
  double prior_mean = 0;            // L = K(K+1)/(2A)
};

/// Bayesian average r(t) = (C*L + sum_d q_d(t)) / (C + Df(t)).
double bayesian_average(double prior_weight, double prior_mean, double q_sum, double df);

CorpusRanking corpus_rank(std::span<const DocRanking> rankings, const Vocabulary& vocabulary,
                          const DiscretizeParams& levels);

}  // namespace termweave
