#pragma once

#include <Eigen/Dense>

#include "otgk/embeddings.hpp"
#include "otgk/graph.hpp"

namespace otgk {

enum class GroundMetric { kEuclidean, kHamming };

struct CostMatrix {
  Eigen::MatrixXd entries;
  GroundMetric metric = GroundMetric::kEuclidean;

  Eigen::Index rows() const noexcept { return entries.rows(); }
  Eigen::Index cols() const noexcept { return entries.cols(); }
};

struct TransportPlan {
  Eigen::MatrixXd matrix;
};

struct OtResult {
  double distance = 0.0;
  TransportPlan plan;
};

// Pairwise ground distances between the rows of `a` and the rows of `b`.
// Hamming counts coordinates that differ exactly.
CostMatrix ground_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                       GroundMetric metric);

// Exact transportation problem min <P, M> over P >= 0 with P 1 = r and
// P^T 1 = c, solved by the network simplex method on the bipartite
// transportation graph. Zero weights are allowed. Throws ContractViolation
// if the total masses differ by more than 1e-9; otherwise both sides are
// renormalized to unit mass.
OtResult exact_ot(const Eigen::VectorXd& r, const Eigen::VectorXd& c,
                  const CostMatrix& cost);
OtResult exact_ot(const DiscreteDistribution& r, const DiscreteDistribution& c,
                  const CostMatrix& cost);

// Distance only; Euclidean ground cost between the two supports.
double ot_distance(const DiscreteDistribution& r, const DiscreteDistribution& c);

// Scaling vectors of one Sinkhorn solve; the plan is diag(u) K diag(v).
struct SinkhornScaling {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  int iterations = 0;
};

// Runs u <- r / (K (c / K^T u)) starting from u = 1 for at most `max_iter`
// rounds, then v <- c / K^T u. A positive `tolerance` stops early once no
// entry of u changes by more than tolerance * |u_i|. Every weight must be
// strictly positive. Throws NumericalError when a denominator falls below
// 1e-300.
SinkhornScaling sinkhorn_scale(const Eigen::MatrixXd& kernel,
                               const Eigen::VectorXd& r,
                               const Eigen::VectorXd& c, int max_iter,
                               double tolerance = 0.0);

struct SinkhornOptions {
  double lambda = 1.0;
  int max_iter = 200;
  double tolerance = 0.0;
};

// Entropic transport with kernel exp(-lambda M). Zero-weight support points
// are removed before scaling and come back as zero rows/columns of the plan.
// The distance is <plan, M>.
OtResult sinkhorn(const Eigen::VectorXd& r, const Eigen::VectorXd& c,
                  const CostMatrix& cost, const SinkhornOptions& options);

// Exact OT between uniform distributions over the d-dimensional eigen
// embeddings of two graphs, Euclidean ground cost.
double graph_ot_distance(const Graph& g1, const Graph& g2,
                         int d = kDefaultEmbedDim);

// Exact OT between the level-l histograms, Euclidean cost on cell centres.
double pyramid_level_distance(const PyramidEmbedding& p1,
                              const PyramidEmbedding& p2, int l);

}  // namespace otgk
