#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "termweave/ingest.hpp"
#include "termweave/ranking.hpp"

namespace termweave {

/// Corpus term co-occurrence graph. Vertex v stands for vertex_terms[v]
/// (ascending term ids); the weight of {s, t} is the number of documents whose
/// retained term sets contain both.
struct TermGraph {
  double reduction = 100.0;
  std::string corpus_id;
  std::vector<TermId> vertex_terms;
  std::vector<std::uint64_t> offsets;    // CSR, size vertex_count() + 1
  std::vector<std::uint32_t> neighbors;  // ascending within each row
  std::vector<std::uint32_t> weights;
  std::vector<std::vector<TermId>> retained;  // per document, rank order

  std::size_t vertex_count() const noexcept { return vertex_terms.size(); }
  std::size_t edge_count() const noexcept { return neighbors.size() / 2; }
  std::optional<std::uint32_t> vertex_of(TermId term) const;
  std::uint32_t weight(std::uint32_t u, std::uint32_t v) const;
  std::uint64_t total_weight() const;

  bool operator==(const TermGraph&) const = default;
};

/// floor(p * l / 100), guarded against representation error in p.
std::size_t retained_count(std::size_t unique_terms, double reduction);

/// The top retained_count() terms of a ranking.
std::vector<TermId> retained_terms(const DocRanking& ranking, double reduction);

/// The document's token sequence restricted to its retained terms.
std::vector<TermId> reduce_document(const IndexedDocument& doc, const DocRanking& ranking, double reduction);

TermGraph build_corpus_graph(const Corpus& corpus, std::span<const DocRanking> rankings, double reduction,
                             std::string corpus_id = {});

void write_graph_binary(std::ostream& out, const TermGraph& graph);
TermGraph read_graph_binary(std::istream& in);

/// Text form: "#vertices <n>" followed by one term per line, then
/// "#edges <m>" followed by "termA<TAB>termB<TAB>weight" lines.
void write_edge_list(std::ostream& out, const TermGraph& graph, const Vocabulary& vocabulary);
/// Reads the text form; unknown terms are interned into the vocabulary.
TermGraph read_edge_list(std::istream& in, Vocabulary& vocabulary);

}  // namespace termweave
