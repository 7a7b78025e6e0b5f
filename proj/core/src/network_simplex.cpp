#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "otgk/error.hpp"

namespace otgk::detail {
namespace {

// Spanning-tree basis of the transportation problem. Nodes 0..n-1 are
// sources, n..n+m-1 sinks; every basic cell is a tree edge.
class TransportationSimplex {
 public:
  TransportationSimplex(const Eigen::VectorXd& supply,
                        const Eigen::VectorXd& demand,
                        const Eigen::MatrixXd& cost)
      : n_(static_cast<int>(supply.size())),
        m_(static_cast<int>(demand.size())),
        cost_(cost),
        basic_index_(static_cast<std::size_t>(n_) * m_, -1),
        adjacency_(n_ + m_),
        potential_(n_ + m_),
        parent_node_(n_ + m_),
        parent_cell_(n_ + m_) {
    northwest_corner(supply, demand);
    const double scale = std::max(1.0, cost_.cwiseAbs().maxCoeff());
    epsilon_ = 1e-12 * scale;
  }

  void solve() {
    const long cap = 10000L + 50L * n_ * m_;
    int degenerate_streak = 0;
    bool bland = false;
    for (long iter = 0; iter < cap; ++iter) {
      build_adjacency();
      compute_potentials();
      int enter_row = -1;
      int enter_col = -1;
      if (!select_entering(bland, &enter_row, &enter_col)) return;
      const double theta = pivot(enter_row, enter_col);
      if (theta == 0.0) {
        if (++degenerate_streak > n_ + m_) bland = true;
      } else {
        degenerate_streak = 0;
      }
    }
    throw NumericalError("exact_ot: network simplex exceeded its pivot cap");
  }

  double objective() const {
    double total = 0.0;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      total += flow_[k] * cost_(rows_[k], cols_[k]);
    }
    return total;
  }

  void write_plan(Eigen::MatrixXd* plan) const {
    plan->setZero(n_, m_);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      (*plan)(rows_[k], cols_[k]) = flow_[k];
    }
  }

 private:
  void add_basic(int i, int j, double x) {
    basic_index_[static_cast<std::size_t>(i) * m_ + j] =
        static_cast<int>(rows_.size());
    rows_.push_back(i);
    cols_.push_back(j);
    flow_.push_back(x);
  }

  // Produces exactly n + m - 1 basic cells forming a spanning tree; some may
  // carry zero flow.
  void northwest_corner(Eigen::VectorXd supply, Eigen::VectorXd demand) {
    int i = 0;
    int j = 0;
    while (true) {
      if (i == n_ - 1 && j == m_ - 1) {
        add_basic(i, j, std::max(0.0, std::max(supply[i], demand[j])));
        break;
      }
      const double x = std::min(supply[i], demand[j]);
      add_basic(i, j, x);
      supply[i] -= x;
      demand[j] -= x;
      if (j == m_ - 1 || (i < n_ - 1 && supply[i] <= demand[j])) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void build_adjacency() {
    for (auto& list : adjacency_) list.clear();
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      adjacency_[rows_[k]].push_back(static_cast<int>(k));
      adjacency_[n_ + cols_[k]].push_back(static_cast<int>(k));
    }
  }

  int other_end(int node, int cell) const {
    return node < n_ ? n_ + cols_[cell] : rows_[cell];
  }

  // u_i + v_j = c_ij on every basic cell, u_0 = 0.
  void compute_potentials() {
    std::fill(parent_node_.begin(), parent_node_.end(), -2);
    stack_.assign(1, 0);
    parent_node_[0] = -1;
    potential_[0] = 0.0;
    while (!stack_.empty()) {
      const int node = stack_.back();
      stack_.pop_back();
      for (int cell : adjacency_[node]) {
        const int next = other_end(node, cell);
        if (parent_node_[next] != -2) continue;
        parent_node_[next] = node;
        potential_[next] = cost_(rows_[cell], cols_[cell]) - potential_[node];
        stack_.push_back(next);
      }
    }
  }

  // Dantzig (most negative reduced cost, lowest index on ties) or Bland
  // (first negative in row-major order).
  bool select_entering(bool bland, int* row, int* col) const {
    double best = -epsilon_;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < m_; ++j) {
        if (basic_index_[static_cast<std::size_t>(i) * m_ + j] >= 0) continue;
        const double reduced = cost_(i, j) - potential_[i] - potential_[n_ + j];
        if (reduced < best) {
          best = reduced;
          *row = i;
          *col = j;
          if (bland) return true;
        }
      }
    }
    return *row >= 0;
  }

  // Adds cell (i, j) to the tree, pushes flow around the created cycle and
  // drops the blocking cell. Returns the amount pushed.
  double pivot(int i, int j) {
    // Tree path from source i to sink j.
    std::fill(parent_node_.begin(), parent_node_.end(), -2);
    parent_node_[i] = -1;
    stack_.assign(1, i);
    const int target = n_ + j;
    while (!stack_.empty() && parent_node_[target] == -2) {
      const int node = stack_.back();
      stack_.pop_back();
      for (int cell : adjacency_[node]) {
        const int next = other_end(node, cell);
        if (parent_node_[next] != -2) continue;
        parent_node_[next] = node;
        parent_cell_[next] = cell;
        stack_.push_back(next);
      }
    }
    // Walking back from the sink, cells alternate -, +, -, ... and the last
    // one (adjacent to source i) is also -.
    path_.clear();
    for (int node = target; node != i; node = parent_node_[node]) {
      path_.push_back(parent_cell_[node]);
    }
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    std::size_t leaving_key = 0;
    for (std::size_t p = 0; p < path_.size(); p += 2) {
      const int cell = path_[p];
      const std::size_t key =
          static_cast<std::size_t>(rows_[cell]) * m_ + cols_[cell];
      if (flow_[cell] < theta || (flow_[cell] == theta && key < leaving_key)) {
        theta = flow_[cell];
        leaving = cell;
        leaving_key = key;
      }
    }
    for (std::size_t p = 0; p < path_.size(); ++p) {
      flow_[path_[p]] += (p % 2 == 0) ? -theta : theta;
    }
    flow_[leaving] = 0.0;
    basic_index_[leaving_key] = -1;
    rows_[leaving] = i;
    cols_[leaving] = j;
    flow_[leaving] = theta;
    basic_index_[static_cast<std::size_t>(i) * m_ + j] = leaving;
    return theta;
  }

  int n_;
  int m_;
  const Eigen::MatrixXd& cost_;
  double epsilon_ = 0.0;

  std::vector<int> rows_;
  std::vector<int> cols_;
  std::vector<double> flow_;
  std::vector<int> basic_index_;

  std::vector<std::vector<int>> adjacency_;
  std::vector<double> potential_;
  std::vector<int> parent_node_;
  std::vector<int> parent_cell_;
  std::vector<int> stack_;
  std::vector<int> path_;
};

}  // namespace

double solve_transportation(const Eigen::VectorXd& supply,
                            const Eigen::VectorXd& demand,
                            const Eigen::MatrixXd& cost,
                            Eigen::MatrixXd* plan) {
  TransportationSimplex simplex(supply, demand, cost);
  simplex.solve();
  if (plan) simplex.write_plan(plan);
  return simplex.objective();
}

}  // namespace otgk::detail
