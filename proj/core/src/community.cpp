#include "termweave/community.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

#include "termweave/error.hpp"
#include "termweave/graph.hpp"

namespace termweave {

Partition Partition::singletons(std::size_t n) {
  Partition p;
  p.membership.resize(n);
  std::iota(p.membership.begin(), p.membership.end(), 0u);
  p.community_count = n;
  return p;
}

Partition Partition::whole(std::size_t n) {
  Partition p;
  p.membership.assign(n, 0);
  p.community_count = n ? 1 : 0;
  return p;
}

Partition Partition::from_labels(std::span<const std::uint32_t> labels) {
  Partition p;
  p.membership.reserve(labels.size());
  std::unordered_map<std::uint32_t, std::uint32_t> map;
  for (auto l : labels) {
    auto [it, inserted] = map.emplace(l, static_cast<std::uint32_t>(map.size()));
    p.membership.push_back(it->second);
  }
  p.community_count = map.size();
  return p;
}

std::vector<std::vector<std::uint32_t>> Partition::communities() const {
  std::vector<std::vector<std::uint32_t>> out(community_count);
  for (std::uint32_t v = 0; v < membership.size(); ++v) out.at(membership[v]).push_back(v);
  return out;
}

double modularity(const WeightedGraph& graph, const Partition& partition, double gamma) {
  if (partition.membership.size() != graph.size()) throw DataError("partition does not cover the graph");
  const double two_m = graph.total_degree();
  if (!(two_m > 0.0)) throw DataError("modularity is undefined on a graph without edges");
  std::size_t k = 0;
  for (auto c : partition.membership) k = std::max<std::size_t>(k, c + 1);
  std::vector<double> inside(k, 0.0), degree(k, 0.0);
  for (std::uint32_t v = 0; v < graph.size(); ++v) {
    const auto c = partition.membership[v];
    degree[c] += graph.degree(v);
    inside[c] += graph.self_weight(v);
    const auto nbrs = graph.neighbors(v);
    const auto ws = graph.weights(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (partition.membership[nbrs[i]] == c) inside[c] += ws[i];
    }
  }
  double intra = 0, expected = 0;
  for (std::size_t c = 0; c < k; ++c) {
    intra += inside[c];
    expected += degree[c] * degree[c];
  }
  return intra / two_m - gamma * expected / (two_m * two_m);
}

void DetectParams::validate() const {
  if (!(gamma > 0.0)) throw DataError("gamma must be positive");
  if (n_rep == 0 || n_con == 0 || n_con > n_rep) throw DataError("need 0 < n_con <= n_rep");
  if (!(min_size_fraction > 0.0 && min_size_fraction <= 1.0)) throw DataError("min_size_frac must lie in (0, 1]");
}

namespace {

double median(std::vector<std::size_t> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0;
  if (n % 2 == 1) return static_cast<double>(values[n / 2]);
  return 0.5 * static_cast<double>(values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

ConsensusGroups consensus_groups(std::span<const Partition> runs, std::size_t n_con, double min_size_fraction) {
  if (runs.empty()) throw DataError("consensus needs at least one partition");
  const std::size_t n = runs.front().membership.size();
  for (const auto& p : runs) {
    if (p.membership.size() != n) throw DataError("partitions cover different vertex sets");
  }
  ConsensusGroups out;
  std::vector<std::vector<std::vector<std::uint32_t>>> members;
  members.reserve(runs.size());
  for (const auto& p : runs) {
    members.push_back(Partition::from_labels(p.membership).communities());
    out.run_community_counts.push_back(members.back().size());
  }
  out.median_community_count = median(out.run_community_counts);
  out.min_size = out.median_community_count > 0
                     ? min_size_fraction * static_cast<double>(n) / out.median_community_count
                     : 0.0;

  std::vector<Partition> normalized;
  normalized.reserve(runs.size());
  for (const auto& p : runs) normalized.push_back(Partition::from_labels(p.membership));

  std::vector<char> remaining(n, 1);
  std::vector<std::uint32_t> together(n, 0);
  std::vector<std::uint32_t> touched;
  for (std::uint32_t t = 0; t < n; ++t) {
    if (!remaining[t]) continue;
    remaining[t] = 0;
    std::vector<std::uint32_t> group{t};
    touched.clear();
    for (std::size_t i = 0; i < normalized.size(); ++i) {
      for (auto s : members[i][normalized[i].membership[t]]) {
        if (!remaining[s]) continue;
        if (together[s]++ == 0) touched.push_back(s);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto s : touched) {
      if (together[s] >= n_con) {
        group.push_back(s);
        remaining[s] = 0;
      }
      together[s] = 0;
    }
    if (static_cast<double>(group.size()) >= out.min_size) {
      out.groups.push_back(std::move(group));
    } else {
      out.unassigned.insert(out.unassigned.end(), group.begin(), group.end());
    }
  }
  std::sort(out.unassigned.begin(), out.unassigned.end());
  return out;
}

ConsensusGroups detect_groups(const WeightedGraph& graph, const DetectParams& params, unsigned threads) {
  params.validate();
  if (graph.size() == 0) throw DataError("cannot detect topics on an empty graph");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<Partition> runs(params.n_rep);
  auto work = [&](std::size_t i) { runs[i] = leiden(graph, params.gamma, params.seed + i).partition; };
  if (threads == 1) {
    for (std::size_t i = 0; i < params.n_rep; ++i) work(i);
  } else {
    std::vector<std::future<void>> pending;
    std::size_t next = 0;
    while (next < params.n_rep || !pending.empty()) {
      while (next < params.n_rep && pending.size() < threads) {
        pending.push_back(std::async(std::launch::async, work, next++));
      }
      pending.front().get();
      pending.erase(pending.begin());
    }
  }
  return consensus_groups(runs, params.n_con, params.min_size_fraction);
}

std::size_t TopicSet::assigned_count() const {
  std::size_t n = 0;
  for (const auto& t : topics) n += t.size();
  return n;
}

TopicSet detect_topics(const TermGraph& graph, const DetectParams& params, unsigned threads) {
  const auto weighted = WeightedGraph::from_term_graph(graph);
  auto groups = detect_groups(weighted, params, threads);
  TopicSet topics;
  topics.params = params;
  topics.reduction = graph.reduction;
  topics.min_size = groups.min_size;
  topics.median_community_count = groups.median_community_count;
  topics.run_community_counts = groups.run_community_counts;
  for (const auto& group : groups.groups) {
    std::vector<TermId> terms;
    terms.reserve(group.size());
    for (auto v : group) terms.push_back(graph.vertex_terms[v]);
    std::sort(terms.begin(), terms.end());
    topics.topics.push_back(std::move(terms));
  }
  for (auto v : groups.unassigned) topics.unassigned.push_back(graph.vertex_terms[v]);
  std::sort(topics.unassigned.begin(), topics.unassigned.end());
  return topics;
}

}  // namespace termweave
