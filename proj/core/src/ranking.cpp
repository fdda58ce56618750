#include "termweave/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

#include "termweave/error.hpp"

namespace termweave {

void RankParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("alpha must lie in [0, 1]");
  if (!(beta < 0.0)) throw DataError("beta must be negative");
  if (window < 2) throw DataError("window must be at least 2");
  if (!(idf_floor > 0.0)) throw DataError("idf_floor must be positive");
  if (!(tol > 0.0)) throw DataError("tol must be positive");
  if (max_iter == 0) throw DataError("max_iter must be positive");
}

void DiscretizeParams::validate() const {
  if (levels < 1 || parts < levels) throw DataError("discretization needs A >= K >= 1");
}

double idf_value(std::uint32_t df, std::size_t corpus_size, double floor) {
  if (corpus_size == 0) throw DataError("corpus size must be positive");
  const double v = std::log(static_cast<double>(corpus_size) / (1.0 + static_cast<double>(df)));
  return std::max(v, floor);
}

double idf(TermId term, const Vocabulary& vocabulary, std::size_t corpus_size, double floor) {
  if (term >= vocabulary.size()) throw NotFoundError("unknown term id " + std::to_string(term));
  return idf_value(vocabulary.df(term), corpus_size, floor);
}

std::uint32_t DocTermGraph::count(std::size_t s, std::size_t t) const {
  auto first = neighbors.begin() + offsets[s];
  auto last = neighbors.begin() + offsets[s + 1];
  auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(t));
  if (it == last || *it != t) return 0;
  return counts[static_cast<std::size_t>(it - neighbors.begin())];
}

DocTermGraph build_doc_term_graph(const IndexedDocument& doc, std::size_t window) {
  if (window < 2) throw DataError("window must be at least 2");
  DocTermGraph g;
  g.doc_id = doc.doc_id;
  g.terms = doc.unique_terms;
  g.first_position = doc.first_position;
  g.window = window;

  const std::size_t n = g.terms.size();
  std::unordered_map<TermId, std::uint32_t> local;
  local.reserve(n);
  for (std::size_t i = 0; i < n; ++i) local.emplace(g.terms[i], static_cast<std::uint32_t>(i));

  std::vector<std::uint32_t> seq(doc.sequence.size());
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = local.at(doc.sequence[i]);

  // one entry per unordered pair occurrence, stored in both directions
  std::vector<std::uint64_t> pairs;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const std::size_t last = std::min(seq.size(), i + window);
    for (std::size_t j = i + 1; j < last; ++j) {
      if (seq[i] == seq[j]) continue;
      pairs.push_back((static_cast<std::uint64_t>(seq[i]) << 32) | seq[j]);
      pairs.push_back((static_cast<std::uint64_t>(seq[j]) << 32) | seq[i]);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  g.offsets.assign(n + 1, 0);
  for (std::size_t k = 0; k < pairs.size();) {
    std::size_t e = k;
    while (e < pairs.size() && pairs[e] == pairs[k]) ++e;
    const auto s = static_cast<std::uint32_t>(pairs[k] >> 32);
    g.neighbors.push_back(static_cast<std::uint32_t>(pairs[k] & 0xffffffffu));
    g.counts.push_back(static_cast<std::uint32_t>(e - k));
    ++g.offsets[s + 1];
    k = e;
  }
  std::partial_sum(g.offsets.begin(), g.offsets.end(), g.offsets.begin());
  return g;
}

namespace {

struct Chain {
  std::vector<double> teleport;   // positional jump distribution
  std::vector<double> row_norm;   // sum_u idf(u) f_su, 0 for isolated vertices
};

Chain prepare_chain(const DocTermGraph& graph, std::span<const double> idf_values, const RankParams& params) {
  const std::size_t n = graph.size();
  if (idf_values.size() != n) throw DataError("idf vector does not match the document graph");
  Chain chain;
  chain.teleport.resize(n);
  double total = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (!(idf_values[t] > 0.0)) throw DataError("idf values must be positive");
    chain.teleport[t] = std::pow(1.0 + graph.first_position[t], params.beta) * idf_values[t];
    total += chain.teleport[t];
  }
  for (auto& v : chain.teleport) v /= total;
  chain.row_norm.assign(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::uint32_t k = graph.offsets[s]; k < graph.offsets[s + 1]; ++k) {
      chain.row_norm[s] += idf_values[graph.neighbors[k]] * graph.counts[k];
    }
  }
  return chain;
}

}  // namespace

std::vector<double> transition_matrix(const DocTermGraph& graph, std::span<const double> idf_values,
                                      const RankParams& params) {
  params.validate();
  const std::size_t n = graph.size();
  const Chain chain = prepare_chain(graph, idf_values, params);
  std::vector<double> p(n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const bool isolated = chain.row_norm[s] == 0.0;
    const double jump = isolated ? 1.0 : 1.0 - params.alpha;
    for (std::size_t t = 0; t < n; ++t) p[s * n + t] = jump * chain.teleport[t];
    if (isolated) continue;
    for (std::uint32_t k = graph.offsets[s]; k < graph.offsets[s + 1]; ++k) {
      const auto t = graph.neighbors[k];
      p[s * n + t] += params.alpha * idf_values[t] * graph.counts[k] / chain.row_norm[s];
    }
  }
  return p;
}

std::vector<double> pos_idf_rank(const DocTermGraph& graph, std::span<const double> idf_values,
                                 const RankParams& params) {
  params.validate();
  const std::size_t n = graph.size();
  if (n == 0) throw DataError("document '" + graph.doc_id + "' has no terms");
  if (n == 1) return {1.0};
  const Chain chain = prepare_chain(graph, idf_values, params);

  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  double residual = 0;
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    // mass that takes the positional jump: (1 - alpha) from every vertex plus
    // alpha from isolated vertices
    double jump_mass = 0;
    for (std::size_t s = 0; s < n; ++s) {
      jump_mass += pi[s] * (chain.row_norm[s] == 0.0 ? 1.0 : 1.0 - params.alpha);
    }
    for (std::size_t t = 0; t < n; ++t) next[t] = jump_mass * chain.teleport[t];
    for (std::size_t s = 0; s < n; ++s) {
      if (chain.row_norm[s] == 0.0) continue;
      const double scale = params.alpha * pi[s] / chain.row_norm[s];
      for (std::uint32_t k = graph.offsets[s]; k < graph.offsets[s + 1]; ++k) {
        const auto t = graph.neighbors[k];
        next[t] += scale * idf_values[t] * graph.counts[k];
      }
    }
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    residual = 0;
    for (std::size_t t = 0; t < n; ++t) {
      next[t] /= sum;
      residual += std::abs(next[t] - pi[t]);
    }
    pi.swap(next);
    if (residual < params.tol) return pi;
  }
  throw ConvergenceError("posIdfRank did not converge for document '" + graph.doc_id + "' after " +
                             std::to_string(params.max_iter) + " iterations (residual " +
                             std::to_string(residual) + ")",
                         residual);
}

std::vector<std::uint8_t> discretize(std::size_t term_count, const DiscretizeParams& params) {
  params.validate();
  std::vector<std::uint8_t> q(term_count, 0);
  const std::size_t part = term_count / params.parts;
  if (part == 0) return q;
  for (std::size_t b = 0; b < params.levels; ++b) {
    const auto level = static_cast<std::uint8_t>(params.levels - b);
    for (std::size_t i = b * part; i < (b + 1) * part; ++i) q[i] = level;
  }
  return q;
}

DocRanking rank_document(const IndexedDocument& doc, const Vocabulary& vocabulary, std::size_t corpus_size,
                         const RankParams& params, const DiscretizeParams& levels) {
  DocRanking ranking;
  ranking.doc_id = doc.doc_id;
  if (doc.unique_terms.empty()) return ranking;

  const auto graph = build_doc_term_graph(doc, params.window);
  std::vector<double> idfs(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) idfs[i] = idf(graph.terms[i], vocabulary, corpus_size, params.idf_floor);
  const auto pi = pos_idf_rank(graph, idfs, params);

  std::vector<std::size_t> order(graph.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pi[a] != pi[b]) return pi[a] > pi[b];
    return graph.terms[a] < graph.terms[b];
  });
  for (auto i : order) {
    ranking.terms.push_back(graph.terms[i]);
    ranking.r.push_back(pi[i]);
  }
  ranking.q = discretize(ranking.terms.size(), levels);
  return ranking;
}

std::vector<DocRanking> rank_documents(const Corpus& corpus, const RankParams& params,
                                       const DiscretizeParams& levels, unsigned threads) {
  params.validate();
  levels.validate();
  const std::size_t n = corpus.documents.size();
  std::vector<DocRanking> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = rank_document(corpus.documents[i], corpus.vocabulary, n, params, levels);
    }
  };
  if (threads == 1 || n < 64) {
    work(0, n);
    return out;
  }
  std::vector<std::future<void>> workers;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    workers.push_back(std::async(std::launch::async, work, begin, std::min(n, begin + chunk)));
  }
  for (auto& w : workers) w.get();
  return out;
}

double bayesian_average(double prior_weight, double prior_mean, double q_sum, double df) {
  return (prior_weight * prior_mean + q_sum) / (prior_weight + df);
}

CorpusRanking corpus_rank(std::span<const DocRanking> rankings, const Vocabulary& vocabulary,
                          const DiscretizeParams& levels) {
  levels.validate();
  CorpusRanking out;
  const std::size_t v = vocabulary.size();
  if (v == 0) return out;
  const double df_total = std::accumulate(vocabulary.dfs().begin(), vocabulary.dfs().end(), 0.0);
  out.prior_weight = df_total / static_cast<double>(v);
  const auto k = static_cast<double>(levels.levels);
  out.prior_mean = k * (k + 1.0) / (2.0 * static_cast<double>(levels.parts));
  out.q_sum.assign(v, 0);
  for (const auto& ranking : rankings) {
    for (std::size_t i = 0; i < ranking.terms.size(); ++i) out.q_sum.at(ranking.terms[i]) += ranking.q[i];
  }
  out.r.resize(v);
  for (TermId t = 0; t < v; ++t) {
    if (vocabulary.df(t) == 0) throw DataError("term '" + vocabulary.term(t) + "' occurs in no document");
    out.r[t] = bayesian_average(out.prior_weight, out.prior_mean, out.q_sum[t], vocabulary.df(t));
  }
  return out;
}

}  // namespace termweave
