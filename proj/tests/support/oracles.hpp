#pragma once

// Reference implementations used only by tests. They follow the textbook
// definitions directly and share no code with the library paths they check.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "termweave/weighted_graph.hpp"

namespace termweave::testing {

using Matrix = std::vector<std::vector<double>>;

/// Q = (1/2M) sum_ij (A_ij - gamma k_i k_j / 2M) [c_i == c_j] on a symmetric matrix.
double dense_modularity(const Matrix& adjacency, std::span<const std::uint32_t> labels, double gamma);

struct Optimum {
  double quality = 0;
  std::vector<std::uint32_t> labels;
  std::size_t partitions_seen = 0;
};

/// Exhaustive search over all set partitions (restricted growth strings).
Optimum best_partition(const Matrix& adjacency, double gamma);

Matrix random_weighted_graph(std::size_t n, double density, std::mt19937_64& rng);
WeightedGraph to_graph(const Matrix& adjacency);

/// Relabels so that labels appear as 0, 1, 2, ... in order of first use.
std::vector<std::uint32_t> canonical(std::span<const std::uint32_t> labels);

/// Stationary distribution of the posIdfRank chain over a document given as
/// a sequence of local term indices 0..m-1, solved densely.
std::vector<double> dense_stationary(std::span<const std::uint32_t> sequence, std::span<const double> idf,
                                     double alpha, double beta, std::size_t window);

/// Naive Ward clustering: repeatedly merge the closest pair of clusters under
/// d(A,B) = sqrt(2|A||B|/(|A|+|B|)) * |c_A - c_B| while it is below threshold.
std::vector<std::uint32_t> naive_ward(const std::vector<std::vector<double>>& points, double threshold);

}  // namespace termweave::testing
