#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "termweave/ingest.hpp"
#include "termweave/weighted_graph.hpp"

namespace termweave {

struct TermGraph;

/// Assignment of every vertex to a community; labels are dense in
/// [0, community_count).
struct Partition {
  std::vector<std::uint32_t> membership;
  std::size_t community_count = 0;

  static Partition singletons(std::size_t n);
  static Partition whole(std::size_t n);
  /// Relabels arbitrary labels densely in order of first appearance.
  static Partition from_labels(std::span<const std::uint32_t> labels);

  std::vector<std::vector<std::uint32_t>> communities() const;
  bool operator==(const Partition&) const = default;
};

/// Q_gamma = I - gamma * J. Throws DataError on a graph without edge weight.
double modularity(const WeightedGraph& graph, const Partition& partition, double gamma);

struct LeidenOptions {
  std::size_t max_iterations = 64;  // outer passes; stops early once the partition is stable
};

struct LeidenResult {
  Partition partition;
  std::vector<double> quality_trace;  // Q_gamma at the start and after every outer pass
  std::size_t iterations = 0;
};

/// Leiden optimisation of Q_gamma: fast local moving, refinement into
/// well-connected subcommunities, aggregation, repeated until the partition
/// no longer changes. Deterministic for a given seed.
LeidenResult leiden(const WeightedGraph& graph, double gamma, std::uint64_t seed, const LeidenOptions& options = {});
LeidenResult leiden(const WeightedGraph& graph, double gamma, std::uint64_t seed, const Partition& initial,
                    const LeidenOptions& options = {});

struct DetectParams {
  double gamma = 1.0;
  std::size_t n_rep = 20;
  std::size_t n_con = 15;
  double min_size_fraction = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ConsensusGroups {
  std::vector<std::vector<std::uint32_t>> groups;  // vertex ids, ascending within a group
  std::vector<std::uint32_t> unassigned;
  double min_size = 0;
  double median_community_count = 0;
  std::vector<std::size_t> run_community_counts;
};

/// Greedy grouping over repeated partitions: scanning vertices in ascending
/// order, a seed vertex collects every remaining vertex that shares its
/// community in at least n_con runs. Groups smaller than
/// min_size_fraction * n / median(k) are reported as unassigned.
ConsensusGroups consensus_groups(std::span<const Partition> runs, std::size_t n_con, double min_size_fraction);

/// Runs leiden n_rep times (seeds seed, seed+1, ...) concurrently and groups the results.
ConsensusGroups detect_groups(const WeightedGraph& graph, const DetectParams& params, unsigned threads = 0);

struct TopicSet {
  std::vector<std::vector<TermId>> topics;  // ascending term ids within each topic
  std::vector<TermId> unassigned;
  DetectParams params;
  double reduction = 100.0;
  double min_size = 0;
  double median_community_count = 0;
  std::vector<std::size_t> run_community_counts;

  std::size_t assigned_count() const;
  std::size_t term_count() const { return assigned_count() + unassigned.size(); }
};

TopicSet detect_topics(const TermGraph& graph, const DetectParams& params, unsigned threads = 0);

}  // namespace termweave
