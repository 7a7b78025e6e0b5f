#include "otgk/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "otgk/error.hpp"
#include "otgk/linalg.hpp"

namespace otgk {
namespace {

using RowKey = std::vector<std::vector<long long>>;

// Rows quantized to 1e-9 and sorted: the row multiset, independent of node order.
RowKey sorted_rows(const Eigen::MatrixXd& x) {
  RowKey rows(x.rows(), std::vector<long long>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      rows[i][k] = std::llround(x(i, k) * 1e9);
    }
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

bool symmetric_values(const Eigen::VectorXd& u) {
  std::vector<double> v(u.data(), u.data() + u.size());
  std::sort(v.begin(), v.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i] + v[v.size() - 1 - i]) > 1e-9) return false;
  }
  return true;
}

// Columns whose values are symmetric about zero have no order-free sign of
// their own (an automorphism can map u to -u). Their signs are chosen
// together: the pattern with the lexicographically largest sorted rows.
void fix_symmetric_signs(Eigen::MatrixXd& x) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    if (x.col(k).cwiseAbs().maxCoeff() > 0.0 && symmetric_values(x.col(k))) {
      free.push_back(k);
    }
  }
  if (free.empty() || free.size() > 16) return;
  Eigen::MatrixXd best = x;
  RowKey best_key = sorted_rows(x);
  for (unsigned mask = 1; mask < (1u << free.size()); ++mask) {
    Eigen::MatrixXd trial = x;
    for (std::size_t b = 0; b < free.size(); ++b) {
      if (mask & (1u << b)) trial.col(free[b]) *= -1.0;
    }
    RowKey key = sorted_rows(trial);
    if (key > best_key) {
      best_key = std::move(key);
      best = std::move(trial);
    }
  }
  x = std::move(best);
}

// True when one of the first `kept` eigenvalues has a repeat.
bool repeated_within(const Eigen::VectorXd& values, int kept) {
  const double tie = 1e-9 * std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < kept && j + 1 < values.size(); ++j) {
    if (std::abs(values[j] - values[j + 1]) <= tie) return true;
  }
  return false;
}

Eigen::MatrixXd leading_columns(const SymmetricEig& eig, int d) {
  const Eigen::Index n = eig.eigenvectors.rows();
  const Eigen::Index kept = std::min<Eigen::Index>(n, d);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, d);
  x.leftCols(kept) = eig.eigenvectors.leftCols(kept);
  fix_symmetric_signs(x);
  return x;
}

}  // namespace

void DiscreteDistribution::validate(double tol) const {
  if (support.rows() != weights.size()) {
    throw ContractViolation("DiscreteDistribution: support/weight size mismatch");
  }
  if (weights.size() == 0) {
    throw ContractViolation("DiscreteDistribution: empty support");
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw ContractViolation("DiscreteDistribution: negative or non-finite weight");
  }
  if (std::abs(weights.sum() - 1.0) > tol) {
    throw ContractViolation("DiscreteDistribution: weights sum to " +
                            std::to_string(weights.sum()));
  }
}

const DiscreteDistribution& PyramidEmbedding::level(int l) const {
  if (l < 1 || l > num_levels()) {
    throw ContractViolation("PyramidEmbedding: level " + std::to_string(l) +
                            " outside [1, " + std::to_string(num_levels()) +
                            "]");
  }
  return levels[l - 1];
}

NodeEmbedding eigen_embed(const Graph& g, int d) {
  if (d < 1) throw ContractViolation("eigen_embed: d must be >= 1");
  if (g.num_nodes() == 0) throw ContractViolation("eigen_embed: empty graph");
  if (g.num_edges() == 0) {
    // Zero spectrum: every basis is an eigenbasis, so no node is singled out.
    return NodeEmbedding{Eigen::MatrixXd::Zero(g.num_nodes(), d)};
  }
  const int kept = std::min(g.num_nodes(), d);
  SymmetricEig eig = symmetric_eig(adjacency(g));
  if (!repeated_within(eig.eigenvalues, kept)) {
    return NodeEmbedding{leading_columns(eig, d)};
  }
  // A repeated eigenvalue leaves the basis tied to node order; solve on the
  // canonical relabeling and carry the rows back.
  const std::vector<int> pos = canonical_labeling(g);
  eig = symmetric_eig(adjacency(g.permuted(pos)));
  const Eigen::MatrixXd canonical = leading_columns(eig, d);
  NodeEmbedding e;
  e.coordinates.resize(g.num_nodes(), d);
  for (int v = 0; v < g.num_nodes(); ++v) {
    e.coordinates.row(v) = canonical.row(pos[v]);
  }
  return e;
}

NodeEmbedding to_unit_hypercube(const NodeEmbedding& e) {
  NodeEmbedding out;
  out.coordinates =
      ((e.coordinates.array() + 1.0) * 0.5).cwiseMax(0.0).cwiseMin(1.0).matrix();
  return out;
}

DiscreteDistribution pyramid_histogram(const Eigen::MatrixXd& points,
                                       int level) {
  if (level < 1 || level > 30) {
    throw ContractViolation("pyramid_histogram: level must be in [1, 30]");
  }
  if (points.rows() == 0) {
    throw ContractViolation("pyramid_histogram: no points");
  }
  const long cells = 1L << level;
  const Eigen::Index d = points.cols();
  std::map<std::vector<long>, long> counts;
  std::vector<long> cell(d);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double x = std::clamp(points(i, k), 0.0, 1.0);
      cell[k] = std::min(static_cast<long>(std::floor(x * cells)), cells - 1);
    }
    ++counts[cell];
  }
  DiscreteDistribution out;
  out.support.resize(static_cast<Eigen::Index>(counts.size()), d);
  out.weights.resize(static_cast<Eigen::Index>(counts.size()));
  const double width = 1.0 / static_cast<double>(cells);
  const double total = static_cast<double>(points.rows());
  Eigen::Index row = 0;
  for (const auto& [index, count] : counts) {
    for (Eigen::Index k = 0; k < d; ++k) {
      out.support(row, k) = (static_cast<double>(index[k]) + 0.5) * width;
    }
    out.weights[row] = static_cast<double>(count) / total;
    ++row;
  }
  return out;
}

PyramidEmbedding pyramid_embed(const NodeEmbedding& e, int levels) {
  if (levels < 1) throw ContractViolation("pyramid_embed: levels must be >= 1");
  const NodeEmbedding unit = to_unit_hypercube(e);
  PyramidEmbedding out;
  out.levels.reserve(levels);
  for (int l = 1; l <= levels; ++l) {
    out.levels.push_back(pyramid_histogram(unit.coordinates, l));
  }
  return out;
}

DiscreteDistribution graph_distribution(const NodeEmbedding& e) {
  if (e.num_nodes() < 1) {
    throw ContractViolation("graph_distribution: embedding has no rows");
  }
  DiscreteDistribution out;
  out.support = e.coordinates;
  out.weights = Eigen::VectorXd::Constant(e.num_nodes(), 1.0 / e.num_nodes());
  return out;
}

std::vector<Graph> extract_subgraphs(const Graph& g, int radius) {
  if (radius < 1) throw ContractViolation("extract_subgraphs: radius must be >= 1");
  const int n = g.num_nodes();
  std::vector<Graph> out;
  out.reserve(n);
  std::vector<int> depth(n, -1);
  std::deque<int> queue;
  for (int center = 0; center < n; ++center) {
    std::vector<int> ball{center};
    depth[center] = 0;
    queue.assign(1, center);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      if (depth[u] == radius) continue;
      for (int w : g.neighbors()[u]) {
        if (depth[w] < 0) {
          depth[w] = depth[u] + 1;
          ball.push_back(w);
          queue.push_back(w);
        }
      }
    }
    for (int v : ball) depth[v] = -1;
    std::sort(ball.begin(), ball.end());
    out.push_back(g.induced_subgraph(ball));
  }
  return out;
}

}  // namespace otgk
