#include "termweave/analytics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "termweave/error.hpp"

namespace termweave {

TopicLookup::TopicLookup(const TopicSet& topics) : topic_count_(topics.topics.size()) {
  TermId max_term = 0;
  for (const auto& t : topics.topics) {
    for (auto term : t) max_term = std::max(max_term, term);
  }
  topic_.assign(static_cast<std::size_t>(max_term) + 1, -1);
  for (std::size_t i = 0; i < topics.topics.size(); ++i) {
    for (auto term : topics.topics[i]) topic_[term] = static_cast<std::int32_t>(i);
  }
}

std::optional<std::size_t> TopicLookup::topic_of(TermId term) const {
  if (term >= topic_.size() || topic_[term] < 0) return std::nullopt;
  return static_cast<std::size_t>(topic_[term]);
}

TopicShares topic_shares(std::string doc_id, std::span<const TermId> retained_sequence, const TopicLookup& topics,
                         ShareMode mode) {
  TopicShares out;
  out.doc_id = std::move(doc_id);
  out.counts.assign(topics.topic_count(), 0);
  std::vector<TermId> seen;
  for (TermId t : retained_sequence) {
    auto topic = topics.topic_of(t);
    if (!topic) continue;
    if (mode == ShareMode::UniqueTerms) {
      if (std::find(seen.begin(), seen.end(), t) != seen.end()) continue;
      seen.push_back(t);
    }
    ++out.counts[*topic];
  }
  const auto total = std::accumulate(out.counts.begin(), out.counts.end(), std::uint64_t{0});
  if (total == 0) return out;
  out.shares.reserve(out.counts.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < out.counts.size(); ++i) {
    out.shares.push_back(static_cast<double>(out.counts[i]) / static_cast<double>(total));
    if (out.counts[i] > out.counts[best]) best = i;
  }
  out.dominant = best;
  return out;
}

std::uint32_t CrossTable::row_sum(std::size_t row) const {
  return std::accumulate(counts.at(row).begin(), counts.at(row).end(), 0u);
}

std::uint32_t CrossTable::column_sum(std::size_t column) const {
  std::uint32_t s = 0;
  for (const auto& row : counts) s += row.at(column);
  return s;
}

std::uint64_t CrossTable::total() const {
  std::uint64_t s = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) s += row_sum(r);
  return s;
}

CrossTable crosstable(std::span<const std::optional<std::string>> class_labels, std::span<const TopicShares> shares,
                      std::size_t topic_count, std::vector<std::string> topic_labels) {
  if (shares.empty()) throw DataError("cannot build a crosstable from an empty corpus");
  if (class_labels.size() != shares.size()) throw DataError("class labels and topic shares differ in length");
  CrossTable table;
  for (std::size_t i = 0; i < class_labels.size(); ++i) {
    if (!class_labels[i]) throw DataError("document '" + shares[i].doc_id + "' has no class label");
    table.classes.push_back(*class_labels[i]);
  }
  std::sort(table.classes.begin(), table.classes.end());
  table.classes.erase(std::unique(table.classes.begin(), table.classes.end()), table.classes.end());
  if (topic_labels.empty()) {
    for (std::size_t j = 0; j < topic_count; ++j) topic_labels.push_back(std::to_string(j));
  }
  if (topic_labels.size() != topic_count) throw DataError("topic label count mismatch");
  table.topics = std::move(topic_labels);
  table.counts.assign(table.classes.size(), std::vector<std::uint32_t>(topic_count, 0));
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (!shares[i].dominant) {
      ++table.without_dominant;
      continue;
    }
    const auto row = static_cast<std::size_t>(
        std::lower_bound(table.classes.begin(), table.classes.end(), *class_labels[i]) - table.classes.begin());
    ++table.counts[row].at(*shares[i].dominant);
  }
  return table;
}

std::vector<std::optional<std::size_t>> max_weight_matching(const std::vector<std::vector<double>>& weights) {
  const std::size_t rows = weights.size();
  if (rows == 0) return {};
  const std::size_t cols = weights.front().size();
  for (const auto& r : weights) {
    if (r.size() != cols) throw DataError("matching weights must be rectangular");
  }
  std::vector<std::optional<std::size_t>> result(rows);
  if (cols == 0) return result;

  // Hungarian method on costs -w with n <= m; transpose when rows > cols.
  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;
  const std::size_t m = transposed ? rows : cols;
  auto cost = [&](std::size_t i, std::size_t j) { return transposed ? -weights[j][i] : -weights[i][j]; };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transposed) {
      result[j - 1] = p[j] - 1;
    } else {
      result[p[j] - 1] = j - 1;
    }
  }
  return result;
}

ClassStats classification_stats(const CrossTable& table, std::span<const std::optional<std::size_t>> matching) {
  if (matching.size() != table.classes.size()) throw DataError("matching must list one entry per class");
  std::vector<char> used(table.topics.size(), 0);
  for (const auto& m : matching) {
    if (!m) continue;
    if (*m >= table.topics.size()) throw DataError("matching refers to an unknown topic");
    if (used[*m]) throw DataError("matching must be one-to-one");
    used[*m] = 1;
  }
  ClassStats stats;
  double total = 0;
  for (std::size_t c = 0; c < table.classes.size(); ++c) {
    ClassStat s;
    s.label = table.classes[c];
    s.support = table.row_sum(c);
    if (matching[c]) {
      const double tp = table.counts[c][*matching[c]];
      const double predicted = table.column_sum(*matching[c]);
      s.precision = predicted > 0 ? tp / predicted : 0.0;
      s.recall = s.support > 0 ? tp / s.support : 0.0;
      s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    }
    stats.weighted.precision += s.precision * s.support;
    stats.weighted.recall += s.recall * s.support;
    stats.weighted.f1 += s.f1 * s.support;
    total += s.support;
    stats.classes.push_back(std::move(s));
  }
  stats.weighted.label = "weighted avg";
  stats.weighted.support = static_cast<std::uint32_t>(total);
  if (total > 0) {
    stats.weighted.precision /= total;
    stats.weighted.recall /= total;
    stats.weighted.f1 /= total;
  }
  return stats;
}

ClassStats classification_stats(const CrossTable& table) {
  std::vector<std::vector<double>> w(table.classes.size(), std::vector<double>(table.topics.size()));
  for (std::size_t c = 0; c < table.classes.size(); ++c) {
    for (std::size_t t = 0; t < table.topics.size(); ++t) w[c][t] = table.counts[c][t];
  }
  const auto matching = max_weight_matching(w);
  return classification_stats(table, matching);
}

std::uint64_t TopicFlowMatrix::total() const {
  std::uint64_t s = 0;
  for (const auto& row : counts) s = std::accumulate(row.begin(), row.end(), s);
  return s;
}

TopicFlowMatrix compare_topic_sets(const TopicSet& a, const TopicSet& b) {
  TopicFlowMatrix out;
  out.rows = b.topics.size();
  out.cols = a.topics.size();
  out.counts.assign(out.rows, std::vector<std::uint32_t>(out.cols, 0));
  const TopicLookup lookup_a(a);
  for (std::size_t i = 0; i < b.topics.size(); ++i) {
    for (TermId t : b.topics[i]) {
      if (auto j = lookup_a.topic_of(t)) ++out.counts[i][*j];
    }
  }
  return out;
}

double adjusted_rand_index(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  if (a.size() != b.size()) throw DataError("label vectors differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t> joint;
  std::map<std::int64_t, std::uint64_t> ca, cb;
  for (std::size_t i = 0; i < n; ++i) {
    ++joint[{a[i], b[i]}];
    ++ca[a[i]];
    ++cb[b[i]];
  }
  auto pairs = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sum_a = 0, sum_b = 0;
  for (const auto& [k, c] : joint) index += pairs(static_cast<double>(c));
  for (const auto& [k, c] : ca) sum_a += pairs(static_cast<double>(c));
  for (const auto& [k, c] : cb) sum_b += pairs(static_cast<double>(c));
  const double expected = sum_a * sum_b / pairs(static_cast<double>(n));
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace termweave
