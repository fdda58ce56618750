#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "termweave/community.hpp"

namespace termweave {

enum class ShareMode {
  Occurrences,  // every token of a topic term counts
  UniqueTerms,  // each topic term counts once per document
};

/// term id -> topic index, for the terms of one TopicSet.
class TopicLookup {
 public:
  explicit TopicLookup(const TopicSet& topics);
  std::optional<std::size_t> topic_of(TermId term) const;
  std::size_t topic_count() const noexcept { return topic_count_; }

 private:
  std::vector<std::int32_t> topic_;
  std::size_t topic_count_ = 0;
};

struct TopicShares {
  std::string doc_id;
  std::vector<std::uint32_t> counts;  // f_i(d)
  std::vector<double> shares;         // empty when no topic term occurs
  std::optional<std::size_t> dominant;
};

TopicShares topic_shares(std::string doc_id, std::span<const TermId> retained_sequence, const TopicLookup& topics,
                         ShareMode mode = ShareMode::Occurrences);

struct CrossTable {
  std::vector<std::string> classes;       // rows, sorted
  std::vector<std::string> topics;        // column labels
  std::vector<std::vector<std::uint32_t>> counts;
  std::size_t without_dominant = 0;       // labelled documents with no topic terms

  std::uint32_t row_sum(std::size_t row) const;
  std::uint32_t column_sum(std::size_t column) const;
  std::uint64_t total() const;
};

/// Counts (class, dominant topic) pairs. Throws DataError on an empty input or
/// a document without a class label.
CrossTable crosstable(std::span<const std::optional<std::string>> class_labels,
                      std::span<const TopicShares> shares, std::size_t topic_count,
                      std::vector<std::string> topic_labels = {});

/// Maximum-weight assignment of rows to distinct columns (Hungarian method).
/// result[row] is the matched column, or nullopt when rows outnumber columns.
std::vector<std::optional<std::size_t>> max_weight_matching(const std::vector<std::vector<double>>& weights);

struct ClassStat {
  std::string label;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::uint32_t support = 0;
};

struct ClassStats {
  std::vector<ClassStat> classes;
  ClassStat weighted;  // averages weighted by class size
};

/// Per-class precision/recall/f1 for the given class -> topic matching. A
/// class matched to no topic, or to a topic never predicted, gets precision 0.
ClassStats classification_stats(const CrossTable& table, std::span<const std::optional<std::size_t>> matching);
/// Same, with the matching chosen by max_weight_matching over the counts.
ClassStats classification_stats(const CrossTable& table);

/// counts[i][j] = |b.topics[i] ∩ a.topics[j]|
struct TopicFlowMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<std::uint32_t>> counts;

  std::uint64_t total() const;
};

TopicFlowMatrix compare_topic_sets(const TopicSet& a, const TopicSet& b);

double adjusted_rand_index(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

}  // namespace termweave
