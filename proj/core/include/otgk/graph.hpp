#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace otgk {

using Edge = std::pair<int, int>;

// Undirected simple graph. Edges are stored normalized (first < second),
// sorted and unique; the constructor enforces this.
class Graph {
 public:
  Graph() = default;

  // Throws ContractViolation on out-of-range endpoints, self-loops or
  // duplicate edges. Use `from_raw_edges` to sanitize noisy input instead.
  Graph(int num_nodes, std::vector<Edge> edges,
        std::optional<std::vector<int>> node_labels = std::nullopt);

  // Drops self-loops and merges duplicates / reversed pairs. The number of
  // dropped entries is written to `dropped` when non-null.
  static Graph from_raw_edges(int num_nodes, const std::vector<Edge>& edges,
                              std::optional<std::vector<int>> node_labels,
                              std::size_t* dropped = nullptr);

  int num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::optional<std::vector<int>>& node_labels() const noexcept {
    return node_labels_;
  }

  // Sorted neighbour lists.
  const std::vector<std::vector<int>>& neighbors() const noexcept {
    return neighbors_;
  }

  bool has_edge(int u, int v) const;

  // Subgraph induced by `nodes` (kept in the given order; node i of the
  // result is nodes[i]).
  Graph induced_subgraph(const std::vector<int>& nodes) const;

  // Relabel: node v of *this becomes node perm[v] of the result.
  Graph permuted(const std::vector<int>& perm) const;

  // Order-independent 64-bit fingerprint of (num_nodes, edges, labels).
  std::uint64_t fingerprint() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_ &&
           a.node_labels_ == b.node_labels_;
  }

 private:
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::optional<std::vector<int>> node_labels_;
  std::vector<std::vector<int>> neighbors_;
};

struct GraphDataset {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<int> class_labels;

  std::size_t size() const noexcept { return graphs.size(); }

  // Throws ContractViolation if |graphs| != |class_labels|.
  void validate() const;
  // Sorted distinct class labels.
  std::vector<int> distinct_labels() const;
  // FNV-1a hash over every graph fingerprint and label, in order.
  std::uint64_t content_hash() const;
};

// Symmetric 0/1 adjacency with zero diagonal.
Eigen::MatrixXd adjacency(const Graph& g);

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// All-pairs hop counts by BFS from every node. Unreachable pairs hold
// kUnreachable.
std::vector<std::vector<int>> shortest_path_distances(const Graph& g);

// Canonical relabeling of the structure (node labels are ignored): the
// returned permutation maps node v to position perm[v], and g.permuted(perm)
// is the same graph for every relabeling of g. Individualization-refinement
// search with automorphism pruning; exponential only on highly symmetric
// graphs.
std::vector<int> canonical_labeling(const Graph& g);

}  // namespace otgk
