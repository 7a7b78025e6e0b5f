#pragma once

#include <vector>

#include <Eigen/Dense>

#include "otgk/graph.hpp"
#include "otgk/kernels.hpp"

namespace otgk {

struct RgotConfig {
  // Entropic coefficient of the inner Sinkhorn solves; the usual grid is
  // {0.1, 0.2, 0.3, 0.4}.
  double sinkhorn_lambda = 0.1;
  // Weight of the ||K - K0||_F^2 regularizer.
  double C = 200.0;
  // Outer iterations.
  int max_iter = 100;
  // Sinkhorn rounds per pair.
  int sinkhorn_max_iter = 200;
  // Early exit for the inner loop once u stops moving (relative change per
  // entry). Zero runs every round.
  double sinkhorn_tolerance = 1e-12;
  // Outer loop stops when ||K_t - K_{t-1}||_F / ||K_{t-1}||_F falls below
  // this.
  double convergence_tolerance = 1e-6;
  unsigned threads = 0;

  void validate() const;
};

// Columns are graphs; every column lies on the probability simplex with
// entries >= 1e-12.
struct GraphVectorSet {
  Eigen::MatrixXd columns;

  Eigen::Index num_graphs() const noexcept { return columns.cols(); }
  Eigen::Index dimension() const noexcept { return columns.rows(); }
};

// Finest-level (level L) pyramid histogram of every graph, laid out over the
// union of cells occupied anywhere in the dataset (in lexicographic cell
// order). Empty cells get 1e-12 before each column is renormalized.
GraphVectorSet gvec_representation(const GraphDataset& ds, int d, int levels);

struct RgotIteration {
  double min_eigenvalue = 0.0;    // of K after projection
  double min_ground_cost = 0.0;   // min_ij K_ii + K_jj - 2 K_ij after projection
  double relative_change = 0.0;   // ||K_t - K_{t-1}||_F / ||K_{t-1}||_F
  double max_marginal_error = 0.0;  // worst per-pair plan marginal residual
};

struct RgotTrace {
  std::vector<RgotIteration> iterations;
};

// Learns a PSD kernel by alternating entropic transport plans under the
// kernel-induced cost M_ij = K_ii + K_jj - 2 K_ij with a projected step
// K <- proj_PSD(K0 - grad / C), K0 = G^T G. The Sinkhorn marginals for graph
// i are row i of K0 normalized to the simplex, so plans, costs and kernels
// are all N x N. Throws NumericalError on Sinkhorn underflow (naming the
// pair) or a non-finite gradient.
GramMatrix learn_rg_ot(const GraphVectorSet& gvecs, const RgotConfig& cfg,
                       RgotTrace* trace = nullptr);

}  // namespace otgk
