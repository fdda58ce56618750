#include "termweave/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "termweave/error.hpp"

namespace termweave {

std::optional<std::uint32_t> TermGraph::vertex_of(TermId term) const {
  auto it = std::lower_bound(vertex_terms.begin(), vertex_terms.end(), term);
  if (it == vertex_terms.end() || *it != term) return std::nullopt;
  return static_cast<std::uint32_t>(it - vertex_terms.begin());
}

std::uint32_t TermGraph::weight(std::uint32_t u, std::uint32_t v) const {
  auto first = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
  auto last = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
  auto it = std::lower_bound(first, last, v);
  if (it == last || *it != v) return 0;
  return weights[static_cast<std::size_t>(it - neighbors.begin())];
}

std::uint64_t TermGraph::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), std::uint64_t{0}) / 2;
}

std::size_t retained_count(std::size_t unique_terms, double reduction) {
  if (!(reduction > 0.0 && reduction <= 100.0)) throw DataError("reduction percentage must lie in (0, 100]");
  const double exact = reduction * static_cast<double>(unique_terms) / 100.0;
  return std::min(unique_terms, static_cast<std::size_t>(std::floor(exact + 1e-9)));
}

std::vector<TermId> retained_terms(const DocRanking& ranking, double reduction) {
  const auto n = retained_count(ranking.terms.size(), reduction);
  return {ranking.terms.begin(), ranking.terms.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<TermId> reduce_document(const IndexedDocument& doc, const DocRanking& ranking, double reduction) {
  auto kept = retained_terms(ranking, reduction);
  std::sort(kept.begin(), kept.end());
  std::vector<TermId> out;
  for (TermId t : doc.sequence) {
    if (std::binary_search(kept.begin(), kept.end(), t)) out.push_back(t);
  }
  return out;
}

namespace {

void build_csr(TermGraph& g, std::vector<std::uint64_t>& pairs) {
  // pairs hold (u << 32 | v) in both directions over vertex indices
  std::sort(pairs.begin(), pairs.end());
  const std::size_t n = g.vertex_terms.size();
  g.offsets.assign(n + 1, 0);
  g.neighbors.clear();
  g.weights.clear();
  for (std::size_t k = 0; k < pairs.size();) {
    std::size_t e = k;
    while (e < pairs.size() && pairs[e] == pairs[k]) ++e;
    const auto u = static_cast<std::uint32_t>(pairs[k] >> 32);
    g.neighbors.push_back(static_cast<std::uint32_t>(pairs[k] & 0xffffffffu));
    g.weights.push_back(static_cast<std::uint32_t>(e - k));
    ++g.offsets[u + 1];
    k = e;
  }
  std::partial_sum(g.offsets.begin(), g.offsets.end(), g.offsets.begin());
}

}  // namespace

TermGraph build_corpus_graph(const Corpus& corpus, std::span<const DocRanking> rankings, double reduction,
                             std::string corpus_id) {
  if (rankings.size() != corpus.documents.size()) throw DataError("rankings do not cover every document");
  TermGraph g;
  g.reduction = reduction;
  g.corpus_id = std::move(corpus_id);
  g.retained.reserve(rankings.size());
  for (std::size_t d = 0; d < rankings.size(); ++d) {
    if (rankings[d].doc_id != corpus.documents[d].doc_id) throw DataError("rankings are out of document order");
    g.retained.push_back(retained_terms(rankings[d], reduction));
  }

  std::vector<TermId> all;
  for (const auto& kept : g.retained) all.insert(all.end(), kept.begin(), kept.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  g.vertex_terms = std::move(all);

  std::vector<std::uint64_t> pairs;
  std::vector<std::uint32_t> local;
  for (const auto& kept : g.retained) {
    local.clear();
    for (TermId t : kept) local.push_back(*g.vertex_of(t));
    std::sort(local.begin(), local.end());
    for (std::size_t i = 0; i < local.size(); ++i) {
      for (std::size_t j = i + 1; j < local.size(); ++j) {
        pairs.push_back((static_cast<std::uint64_t>(local[i]) << 32) | local[j]);
        pairs.push_back((static_cast<std::uint64_t>(local[j]) << 32) | local[i]);
      }
    }
  }
  build_csr(g, pairs);
  return g;
}

// --- serialization ---------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'W', 'G', 'R', 'A', 'P', 'H', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
  put<std::uint64_t>(out, v.size());
  if (!v.empty()) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("truncated graph cache");
  return v;
}

template <typename T>
std::vector<T> get_vec(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (std::uint64_t{1} << 34)) throw DataError("corrupt graph cache");
  std::vector<T> v(n);
  if (n && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
    throw DataError("truncated graph cache");
  }
  return v;
}

}  // namespace

void write_graph_binary(std::ostream& out, const TermGraph& g) {
  out.write(kMagic, sizeof kMagic);
  put(out, g.reduction);
  put<std::uint64_t>(out, g.corpus_id.size());
  out.write(g.corpus_id.data(), static_cast<std::streamsize>(g.corpus_id.size()));
  put_vec(out, g.vertex_terms);
  put_vec(out, g.offsets);
  put_vec(out, g.neighbors);
  put_vec(out, g.weights);
  put<std::uint64_t>(out, g.retained.size());
  for (const auto& kept : g.retained) put_vec(out, kept);
}

TermGraph read_graph_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic)) {
    throw DataError("not a termweave graph cache");
  }
  TermGraph g;
  g.reduction = get<double>(in);
  const auto id_len = get<std::uint64_t>(in);
  if (id_len > 4096) throw DataError("corrupt graph cache");
  g.corpus_id.resize(id_len);
  if (id_len && !in.read(g.corpus_id.data(), static_cast<std::streamsize>(id_len))) throw DataError("truncated graph cache");
  g.vertex_terms = get_vec<TermId>(in);
  g.offsets = get_vec<std::uint64_t>(in);
  g.neighbors = get_vec<std::uint32_t>(in);
  g.weights = get_vec<std::uint32_t>(in);
  const auto docs = get<std::uint64_t>(in);
  if (docs > (std::uint64_t{1} << 32)) throw DataError("corrupt graph cache");
  g.retained.reserve(docs);
  for (std::uint64_t d = 0; d < docs; ++d) g.retained.push_back(get_vec<TermId>(in));
  if (g.offsets.size() != g.vertex_terms.size() + 1 || g.neighbors.size() != g.weights.size() ||
      g.offsets.back() != g.neighbors.size()) {
    throw DataError("inconsistent graph cache");
  }
  return g;
}

void write_edge_list(std::ostream& out, const TermGraph& g, const Vocabulary& vocabulary) {
  out << "#vertices " << g.vertex_count() << '\n';
  for (TermId t : g.vertex_terms) out << vocabulary.term(t) << '\n';
  out << "#edges " << g.edge_count() << '\n';
  for (std::uint32_t u = 0; u < g.vertex_count(); ++u) {
    for (auto k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      const auto v = g.neighbors[k];
      if (v <= u) continue;
      out << vocabulary.term(g.vertex_terms[u]) << '\t' << vocabulary.term(g.vertex_terms[v]) << '\t' << g.weights[k]
          << '\n';
    }
  }
}

TermGraph read_edge_list(std::istream& in, Vocabulary& vocabulary) {
  std::string line;
  auto header = [&](const char* tag) -> std::size_t {
    if (!std::getline(in, line) || line.rfind(tag, 0) != 0) {
      throw DataError(std::string("edge list: expected '") + tag + "' header");
    }
    std::size_t value = 0;
    const char* first = line.data() + std::string_view(tag).size();
    const char* last = line.data() + line.size();
    if (std::from_chars(first, last, value).ptr != last) throw DataError(std::string("edge list: bad '") + tag + "' count");
    return value;
  };
  TermGraph g;
  const auto n = header("#vertices ");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw DataError("edge list: truncated vertex section");
    g.vertex_terms.push_back(vocabulary.intern(line));
  }
  std::vector<TermId> sorted = g.vertex_terms;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw DataError("edge list: duplicate vertex");
  g.vertex_terms = sorted;

  const auto m = header("#edges ");
  struct Edge {
    std::uint32_t u, v, w;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw DataError("edge list: truncated edge section");
    std::stringstream ss(line);
    std::string a, b, weight;
    if (!std::getline(ss, a, '\t') || !std::getline(ss, b, '\t') || !std::getline(ss, weight)) {
      throw DataError("edge list: malformed edge line '" + line + "'");
    }
    auto ua = vocabulary.find(a), ub = vocabulary.find(b);
    if (!ua || !ub) throw DataError("edge list: edge references an undeclared vertex");
    auto va = g.vertex_of(*ua), vb = g.vertex_of(*ub);
    if (!va || !vb || *va == *vb) throw DataError("edge list: invalid edge '" + line + "'");
    std::uint32_t wt = 0;
    if (std::from_chars(weight.data(), weight.data() + weight.size(), wt).ptr != weight.data() + weight.size()) {
      throw DataError("edge list: bad weight in '" + line + "'");
    }
    if (wt == 0) throw DataError("edge list: zero weight");
    edges.push_back({*va, *vb, wt});
  }
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> directed;
  for (const auto& e : edges) {
    directed.emplace_back(e.u, e.v, e.w);
    directed.emplace_back(e.v, e.u, e.w);
  }
  std::sort(directed.begin(), directed.end());
  g.offsets.assign(g.vertex_terms.size() + 1, 0);
  for (std::size_t k = 0; k < directed.size(); ++k) {
    const auto& [u, v, wt] = directed[k];
    if (k && std::get<0>(directed[k - 1]) == u && std::get<1>(directed[k - 1]) == v) {
      throw DataError("edge list: duplicate edge");
    }
    g.neighbors.push_back(v);
    g.weights.push_back(wt);
    ++g.offsets[u + 1];
  }
  std::partial_sum(g.offsets.begin(), g.offsets.end(), g.offsets.begin());
  return g;
}

}  // namespace termweave
