#pragma once

#include <vector>

#include <Eigen/Dense>

#include "otgk/graph.hpp"

namespace otgk {

// Row i holds the coordinates of node i.
struct NodeEmbedding {
  Eigen::MatrixXd coordinates;

  int num_nodes() const noexcept { return static_cast<int>(coordinates.rows()); }
  int dimension() const noexcept { return static_cast<int>(coordinates.cols()); }
};

// Weighted point set with weights on the probability simplex. Row i of
// `support` is a point, weights[i] its mass.
struct DiscreteDistribution {
  Eigen::MatrixXd support;
  Eigen::VectorXd weights;

  Eigen::Index size() const noexcept { return weights.size(); }
  Eigen::Index dimension() const noexcept { return support.cols(); }

  // Throws ContractViolation when sizes disagree, a weight is negative or
  // the weights do not sum to 1 within `tol`.
  void validate(double tol = 1e-10) const;
};

// One histogram per pyramid level; levels[l - 1] is level l.
struct PyramidEmbedding {
  std::vector<DiscreteDistribution> levels;

  int num_levels() const noexcept { return static_cast<int>(levels.size()); }
  const DiscreteDistribution& level(int l) const;
};

inline constexpr int kDefaultEmbedDim = 6;
inline constexpr int kDefaultSubgraphRadius = 2;

// Column j is the canonical-sign eigenvector of the adjacency eigenvalue with
// the j-th largest magnitude; graphs with fewer than d nodes are zero-padded.
// Columns whose values are symmetric about zero get their signs jointly, and
// graphs with a repeated eigenvalue among the kept ones are solved on their
// canonical relabeling, so relabeling the nodes permutes the rows of the
// result (up to an automorphism).
// Edgeless graphs (zero spectrum) embed to the zero matrix.
NodeEmbedding eigen_embed(const Graph& g, int d);

// x -> (x + 1) / 2 per entry, clamped to [0, 1].
NodeEmbedding to_unit_hypercube(const NodeEmbedding& e);

// Joint grid histogram with 2^level equal intervals per dimension (the last
// interval closed). Support points are the centres of occupied cells in
// lexicographic cell order; weights are occupancy fractions.
DiscreteDistribution pyramid_histogram(const Eigen::MatrixXd& points,
                                       int level);

// Levels 1..levels of pyramid_histogram over the hypercube-mapped embedding.
PyramidEmbedding pyramid_embed(const NodeEmbedding& e, int levels);

// Embedding rows as support, each with mass 1/n. Duplicate rows are kept.
DiscreteDistribution graph_distribution(const NodeEmbedding& e);

// Subgraph i is induced by all nodes within `radius` hops of node i, kept in
// ascending node order.
std::vector<Graph> extract_subgraphs(const Graph& g, int radius);

}  // namespace otgk
