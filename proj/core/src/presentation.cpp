#include "termweave/presentation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "termweave/error.hpp"
#include "termweave/text.hpp"

namespace termweave {

const std::vector<float>* EmbeddingTable::find(std::string_view word) const {
  if (auto it = vectors.find(std::string(word)); it != vectors.end()) return &it->second;
  if (auto it = vectors.find(text::to_lower(word)); it != vectors.end()) return &it->second;
  return nullptr;
}

EmbeddingTable parse_vectors(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("vector file is empty");
  std::size_t declared_count = 0;
  {
    std::istringstream header(line);
    if (!(header >> declared_count >> table.dimension) || table.dimension == 0) {
      throw DataError("vector file header must be '<count> <dim>'");
    }
  }
  std::vector<float> values;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0) {
      ++table.skipped_lines;
      continue;
    }
    std::string word = line.substr(0, space);
    values.clear();
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    bool ok = true;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      float x = 0;
      // std::from_chars for float is available with libstdc++ 11
      auto [next, ec] = std::from_chars(p, end, x);
      if (ec != std::errc()) {
        ok = false;
        break;
      }
      values.push_back(x);
      p = next;
    }
    if (!ok || values.size() != table.dimension) {
      ++table.skipped_lines;
      continue;
    }
    table.vectors.insert_or_assign(std::move(word), values);
  }
  if (table.vectors.empty()) throw DataError("vector file holds no usable vectors");
  (void)declared_count;
  return table;
}

EmbeddingTable load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return parse_vectors(in);
}

std::optional<std::vector<double>> embed(std::string_view term, const EmbeddingTable& table) {
  if (const auto* v = table.find(term)) return std::vector<double>(v->begin(), v->end());
  if (term.find('_') == std::string_view::npos) return std::nullopt;
  std::vector<double> sum(table.dimension, 0.0);
  std::size_t found = 0;
  std::size_t start = 0;
  while (start <= term.size()) {
    const auto stop = std::min(term.find('_', start), term.size());
    const auto part = term.substr(start, stop - start);
    if (!part.empty()) {
      if (const auto* v = table.find(part)) {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
        ++found;
      }
    }
    start = stop + 1;
  }
  if (found == 0) return std::nullopt;
  for (auto& x : sum) x /= static_cast<double>(found);
  return sum;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Condensed symmetric matrix over n items.
class Condensed {
 public:
  explicit Condensed(std::size_t n) : n_(n), data_(n * (n - 1) / 2) {}
  double& at(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return data_[n_ * i - i * (i + 1) / 2 + (j - i - 1)];
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

}  // namespace

std::vector<std::uint32_t> agglomerative_clusters(std::span<const std::vector<double>> points, double threshold,
                                                  Linkage linkage) {
  const std::size_t n = points.size();
  if (n == 0) return {};
  if (n == 1) return {0};
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw DataError("points must share one dimension");
  }

  // Ward works on squared distances (Lance-Williams), the others on plain ones.
  const bool squared = linkage == Linkage::Ward;
  Condensed d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sq = squared_distance(points[i], points[j]);
      d.at(i, j) = squared ? sq : std::sqrt(sq);
    }
  }

  struct Merge {
    std::size_t a, b;
    double height;
  };
  std::vector<Merge> merges;
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);

  // nearest-neighbour chain; valid because all four linkages are reducible
  std::vector<std::size_t> chain;
  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) {
          chain.push_back(i);
          break;
        }
      }
    }
    while (true) {
      const std::size_t x = chain.back();
      std::size_t best = n;
      double best_d = std::numeric_limits<double>::infinity();
      if (chain.size() >= 2) {
        best = chain[chain.size() - 2];
        best_d = d.at(x, best);
      }
      for (std::size_t y = 0; y < n; ++y) {
        if (!active[y] || y == x) continue;
        const double dy = d.at(x, y);
        if (dy < best_d) {
          best_d = dy;
          best = y;
        }
      }
      if (chain.size() >= 2 && best == chain[chain.size() - 2]) break;
      chain.push_back(best);
    }
    const std::size_t b = chain.back();
    chain.pop_back();
    const std::size_t a = chain.back();
    chain.pop_back();
    const double dab = d.at(a, b);
    merges.push_back({a, b, squared ? std::sqrt(dab) : dab});

    // merged cluster keeps index a
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double dka = d.at(k, a), dkb = d.at(k, b);
      const double na = static_cast<double>(size[a]), nb = static_cast<double>(size[b]),
                   nk = static_cast<double>(size[k]);
      double v = 0;
      switch (linkage) {
        case Linkage::Ward:
          v = ((na + nk) * dka + (nb + nk) * dkb - nk * dab) / (na + nb + nk);
          break;
        case Linkage::Average:
          v = (na * dka + nb * dkb) / (na + nb);
          break;
        case Linkage::Complete:
          v = std::max(dka, dkb);
          break;
        case Linkage::Single:
          v = std::min(dka, dkb);
          break;
      }
      d.at(k, a) = v;
    }
    size[a] += size[b];
    active[b] = 0;
    --remaining;
  }

  // cut: apply merges below the threshold in height order
  std::stable_sort(merges.begin(), merges.end(), [](const Merge& x, const Merge& y) { return x.height < y.height; });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& m : merges) {
    if (!(m.height < threshold)) break;
    parent[find(m.b)] = find(m.a);
  }
  std::vector<std::uint32_t> labels(n);
  std::vector<std::uint32_t> map(n, std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    if (map[root] == std::numeric_limits<std::uint32_t>::max()) map[root] = next++;
    labels[i] = map[root];
  }
  return labels;
}

TopicSheet stratify(std::size_t topic, std::span<const TermId> terms, const Vocabulary& vocabulary,
                    const EmbeddingTable& table, std::span<const double> corpus_rank, const StratifyParams& params) {
  if (!(params.threshold > 0.0)) throw DataError("stratification threshold must be positive");
  auto rank_order = [&](TermId a, TermId b) {
    if (corpus_rank[a] != corpus_rank[b]) return corpus_rank[a] > corpus_rank[b];
    return vocabulary.term(a) < vocabulary.term(b);
  };

  TopicSheet sheet;
  sheet.topic = topic;
  std::vector<TermId> embedded;
  std::vector<std::vector<double>> points;
  for (TermId t : terms) {
    if (t >= corpus_rank.size()) throw DataError("term id outside the corpus ranking");
    if (auto v = embed(vocabulary.term(t), table)) {
      embedded.push_back(t);
      points.push_back(std::move(*v));
    } else {
      sheet.residual.push_back(t);
    }
  }
  std::sort(sheet.residual.begin(), sheet.residual.end(), rank_order);

  const auto labels = agglomerative_clusters(points, params.threshold, params.linkage);
  const std::size_t k = labels.empty() ? 0 : 1 + *std::max_element(labels.begin(), labels.end());
  sheet.strata.assign(k, {});
  for (std::size_t i = 0; i < embedded.size(); ++i) sheet.strata[labels[i]].push_back(embedded[i]);
  for (auto& stratum : sheet.strata) std::sort(stratum.begin(), stratum.end(), rank_order);
  std::sort(sheet.strata.begin(), sheet.strata.end(),
            [&](const auto& a, const auto& b) { return rank_order(a.front(), b.front()); });
  return sheet;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

CoherenceReport coherence(std::size_t topic, std::span<const TermId> terms, const Vocabulary& vocabulary,
                          std::span<const double> corpus_rank, const EmbeddingTable& table, double tau) {
  if (!(tau > 0.0)) throw DataError("tau must be positive");
  CoherenceReport report;
  report.topic = topic;
  for (TermId t : terms) {
    if (corpus_rank[t] > tau) report.informative.push_back(t);
  }
  std::sort(report.informative.begin(), report.informative.end(), [&](TermId a, TermId b) {
    if (corpus_rank[a] != corpus_rank[b]) return corpus_rank[a] > corpus_rank[b];
    return vocabulary.term(a) < vocabulary.term(b);
  });
  report.informative_count = report.informative.size();

  std::vector<std::vector<double>> vectors;
  for (TermId t : report.informative) {
    if (auto v = embed(vocabulary.term(t), table)) vectors.push_back(std::move(*v));
  }
  report.embedded_count = vectors.size();
  const std::size_t m = vectors.size();
  if (m < 2) return report;
  double sum = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) sum += 2.0 * cosine_similarity(vectors[i], vectors[j]);
  }
  report.coherence = sum / (static_cast<double>(m) * static_cast<double>(m - 1));
  return report;
}

}  // namespace termweave
