#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "termweave/ingest.hpp"

namespace termweave {

/// Pretrained word vectors in the plain-text "count dim" format.
struct EmbeddingTable {
  std::size_t dimension = 0;
  std::unordered_map<std::string, std::vector<float>> vectors;
  std::size_t skipped_lines = 0;

  const std::vector<float>* find(std::string_view word) const;
};

EmbeddingTable load_vectors(const std::filesystem::path& path);
EmbeddingTable parse_vectors(std::istream& in);

/// Exact lookup, then lowercase. Underscore-joined compounds without their own
/// vector get the mean of their component vectors (components that are
/// missing are skipped); nullopt when nothing is found.
std::optional<std::vector<double>> embed(std::string_view term, const EmbeddingTable& table);

enum class Linkage { Ward, Average, Complete, Single };

/// Agglomerative clustering over Euclidean distance; clusters are merged while
/// the linkage distance is below `threshold`. Labels are dense, in order of
/// first appearance.
std::vector<std::uint32_t> agglomerative_clusters(std::span<const std::vector<double>> points, double threshold,
                                                  Linkage linkage = Linkage::Ward);

struct TopicSheet {
  std::size_t topic = 0;
  std::vector<std::vector<TermId>> strata;
  std::vector<TermId> residual;  // terms without any embedding, by descending r
};

struct StratifyParams {
  double threshold = 1.0;
  Linkage linkage = Linkage::Ward;
};

/// Clusters the embeddable topic terms, orders terms within a stratum by
/// descending r(t) and strata by the r of their leading term (ties by term
/// string).
TopicSheet stratify(std::size_t topic, std::span<const TermId> terms, const Vocabulary& vocabulary,
                    const EmbeddingTable& table, std::span<const double> corpus_rank,
                    const StratifyParams& params = {});

struct CoherenceReport {
  std::size_t topic = 0;
  std::vector<TermId> informative;     // H = {t : r(t) > tau}, by descending r
  std::size_t informative_count = 0;   // M_H
  std::size_t embedded_count = 0;      // members of H with a vector
  std::optional<double> coherence;     // mean pairwise cosine similarity over H
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

CoherenceReport coherence(std::size_t topic, std::span<const TermId> terms, const Vocabulary& vocabulary,
                          std::span<const double> corpus_rank, const EmbeddingTable& table, double tau = 0.25);

}  // namespace termweave
