#include "otgk/graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "otgk/error.hpp"

namespace otgk {
namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t value) {
  for (int byte = 0; byte < 8; ++byte) {
    h ^= (value >> (8 * byte)) & 0xffU;
    h *= kFnvPrime;
  }
}

}  // namespace

Graph::Graph(int num_nodes, std::vector<Edge> edges,
             std::optional<std::vector<int>> node_labels)
    : num_nodes_(num_nodes), node_labels_(std::move(node_labels)) {
  if (num_nodes < 0) throw ContractViolation("Graph: negative node count");
  if (node_labels_ && static_cast<int>(node_labels_->size()) != num_nodes) {
    throw ContractViolation("Graph: node label count differs from node count");
  }
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw ContractViolation("Graph: edge endpoint out of range (" +
                              std::to_string(u) + "," + std::to_string(v) +
                              ")");
    }
    if (u == v) {
      throw ContractViolation("Graph: self-loop on node " + std::to_string(u));
    }
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ContractViolation("Graph: duplicate edge");
  }
  edges_ = std::move(edges);

  neighbors_.assign(num_nodes_, {});
  for (const auto& [u, v] : edges_) {
    neighbors_[u].push_back(v);
    neighbors_[v].push_back(u);
  }
  for (auto& list : neighbors_) std::sort(list.begin(), list.end());
}

Graph Graph::from_raw_edges(int num_nodes, const std::vector<Edge>& edges,
                            std::optional<std::vector<int>> node_labels,
                            std::size_t* dropped) {
  std::set<Edge> unique;
  std::size_t skipped = 0;
  for (auto [u, v] : edges) {
    if (u == v) {
      ++skipped;
      continue;
    }
    if (u > v) std::swap(u, v);
    if (!unique.insert({u, v}).second) ++skipped;
  }
  if (dropped) *dropped = skipped;
  return Graph(num_nodes, std::vector<Edge>(unique.begin(), unique.end()),
               std::move(node_labels));
}

bool Graph::has_edge(int u, int v) const {
  if (u < 0 || u >= num_nodes_) return false;
  const auto& list = neighbors_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

Graph Graph::induced_subgraph(const std::vector<int>& nodes) const {
  std::vector<int> local(num_nodes_, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    local.at(nodes[i]) = static_cast<int>(i);
  }
  std::vector<Edge> sub;
  for (const auto& [u, v] : edges_) {
    if (local[u] >= 0 && local[v] >= 0) sub.emplace_back(local[u], local[v]);
  }
  std::optional<std::vector<int>> labels;
  if (node_labels_) {
    labels.emplace();
    for (int v : nodes) labels->push_back((*node_labels_)[v]);
  }
  return Graph(static_cast<int>(nodes.size()), std::move(sub),
               std::move(labels));
}

Graph Graph::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != num_nodes_) {
    throw ContractViolation("Graph::permuted: permutation size mismatch");
  }
  std::vector<Edge> moved;
  moved.reserve(edges_.size());
  for (const auto& [u, v] : edges_) moved.emplace_back(perm[u], perm[v]);
  std::optional<std::vector<int>> labels;
  if (node_labels_) {
    labels.emplace(num_nodes_);
    for (int v = 0; v < num_nodes_; ++v) (*labels)[perm[v]] = (*node_labels_)[v];
  }
  return Graph(num_nodes_, std::move(moved), std::move(labels));
}

std::uint64_t Graph::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, static_cast<std::uint64_t>(num_nodes_));
  for (const auto& [u, v] : edges_) {
    fnv_mix(h, (static_cast<std::uint64_t>(u) << 32) |
                   static_cast<std::uint32_t>(v));
  }
  if (node_labels_) {
    for (int label : *node_labels_) fnv_mix(h, static_cast<std::uint64_t>(label));
  }
  return h;
}

void GraphDataset::validate() const {
  if (graphs.size() != class_labels.size()) {
    throw ContractViolation("GraphDataset '" + name + "': " +
                            std::to_string(graphs.size()) + " graphs but " +
                            std::to_string(class_labels.size()) + " labels");
  }
}

std::vector<int> GraphDataset::distinct_labels() const {
  std::vector<int> labels = class_labels;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

std::uint64_t GraphDataset::content_hash() const {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    fnv_mix(h, graphs[i].fingerprint());
    if (i < class_labels.size()) {
      fnv_mix(h, static_cast<std::uint64_t>(class_labels[i]));
    }
  }
  return h;
}

Eigen::MatrixXd adjacency(const Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
  for (const auto& [u, v] : g.edges()) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

std::vector<std::vector<int>> shortest_path_distances(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, kUnreachable));
  std::deque<int> queue;
  for (int source = 0; source < n; ++source) {
    auto& row = dist[source];
    row[source] = 0;
    queue.assign(1, source);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int w : g.neighbors()[u]) {
        if (row[w] == kUnreachable) {
          row[w] = row[u] + 1;
          queue.push_back(w);
        }
      }
    }
  }
  return dist;
}

namespace {

// Colours are dense ranks 0..k-1. Each round splits colour classes by the
// multiset of neighbour colours; old class order is kept, so the result
// depends only on the structure and the input colouring.
void refine(const Graph& g, std::vector<int>& color) {
  const int n = g.num_nodes();
  int classes = 1 + *std::max_element(color.begin(), color.end());
  std::vector<std::vector<int>> keys(n);
  while (classes < n) {
    for (int v = 0; v < n; ++v) {
      auto& key = keys[v];
      key.assign(1, color[v]);
      for (int w : g.neighbors()[v]) key.push_back(color[w]);
      std::sort(key.begin() + 1, key.end());
    }
    std::vector<std::vector<int>> distinct = keys;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (static_cast<int>(distinct.size()) == classes) break;
    for (int v = 0; v < n; ++v) {
      color[v] = static_cast<int>(
          std::lower_bound(distinct.begin(), distinct.end(), keys[v]) -
          distinct.begin());
    }
    classes = static_cast<int>(distinct.size());
  }
}

// Moves v in front of the rest of its colour class.
std::vector<int> individualize(const std::vector<int>& color, int v) {
  std::vector<int> out(color.size());
  for (std::size_t u = 0; u < color.size(); ++u) out[u] = 2 * color[u] + 1;
  out[v] = 2 * color[v];
  std::vector<int> ranks = out;
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  for (int& c : out) {
    c = static_cast<int>(std::lower_bound(ranks.begin(), ranks.end(), c) -
                         ranks.begin());
  }
  return out;
}

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) v = parent[v] = parent[parent[v]];
  return v;
}

class CanonicalSearch {
 public:
  explicit CanonicalSearch(const Graph& g) : g_(g) { seed_twin_swaps(); }

  std::vector<int> run() {
    std::vector<int> prefix;
    search(std::vector<int>(g_.num_nodes(), 0), prefix);
    return best_;
  }

 private:
  // Swapping two vertices with equal open or closed neighbourhoods is an
  // automorphism; knowing these up front prunes stars, cliques and isolated
  // nodes without search.
  void seed_twin_swaps() {
    const int n = g_.num_nodes();
    for (int closed = 0; closed < 2; ++closed) {
      std::map<std::vector<int>, int> first;
      for (int v = 0; v < n; ++v) {
        std::vector<int> key = g_.neighbors()[v];
        if (closed) key.insert(std::lower_bound(key.begin(), key.end(), v), v);
        const auto [it, inserted] = first.emplace(std::move(key), v);
        if (inserted) continue;
        std::vector<int> swap(n);
        for (int u = 0; u < n; ++u) swap[u] = u;
        std::swap(swap[it->second], swap[v]);
        automorphisms_.push_back(std::move(swap));
      }
    }
  }

  std::vector<Edge> certificate(const std::vector<int>& pos) const {
    std::vector<Edge> cert;
    cert.reserve(g_.num_edges());
    for (const auto& [u, v] : g_.edges()) {
      cert.emplace_back(std::min(pos[u], pos[v]), std::max(pos[u], pos[v]));
    }
    std::sort(cert.begin(), cert.end());
    return cert;
  }

  void leaf(const std::vector<int>& pos) {
    std::vector<Edge> cert = certificate(pos);
    if (best_.empty() || cert > best_cert_) {
      best_ = pos;
      best_cert_ = std::move(cert);
    } else if (cert == best_cert_) {
      // Same graph from two labelings: best^-1 o pos is an automorphism.
      std::vector<int> inverse(pos.size());
      for (std::size_t v = 0; v < pos.size(); ++v) inverse[best_[v]] = static_cast<int>(v);
      std::vector<int> gamma(pos.size());
      for (std::size_t v = 0; v < pos.size(); ++v) gamma[v] = inverse[pos[v]];
      automorphisms_.push_back(std::move(gamma));
    }
  }

  // Orbits of the group generated by known automorphisms fixing `prefix`.
  std::vector<int> orbits(const std::vector<int>& prefix) const {
    std::vector<int> parent(g_.num_nodes());
    for (int v = 0; v < g_.num_nodes(); ++v) parent[v] = v;
    for (const auto& gamma : automorphisms_) {
      const bool fixes = std::all_of(prefix.begin(), prefix.end(),
                                     [&](int v) { return gamma[v] == v; });
      if (!fixes) continue;
      for (int v = 0; v < g_.num_nodes(); ++v) {
        parent[find_root(parent, v)] = find_root(parent, gamma[v]);
      }
    }
    for (int v = 0; v < g_.num_nodes(); ++v) find_root(parent, v);
    return parent;
  }

  void search(std::vector<int> color, std::vector<int>& prefix) {
    refine(g_, color);
    const int n = g_.num_nodes();
    std::vector<int> size(n, 0);
    for (int c : color) ++size[c];
    int target = -1;
    for (int c = 0; c < n && target < 0; ++c) {
      if (size[c] > 1) target = c;
    }
    if (target < 0) {
      leaf(color);
      return;
    }
    std::vector<int> explored;
    std::vector<int> parent;
    std::size_t known = 0;
    for (int w = 0; w < n; ++w) {
      if (color[w] != target) continue;
      if (!explored.empty()) {
        if (parent.empty() || known != automorphisms_.size()) {
          parent = orbits(prefix);
          known = automorphisms_.size();
        }
        const bool seen = std::any_of(explored.begin(), explored.end(), [&](int e) {
          return find_root(parent, e) == find_root(parent, w);
        });
        if (seen) continue;
      }
      explored.push_back(w);
      prefix.push_back(w);
      search(individualize(color, w), prefix);
      prefix.pop_back();
    }
  }

  const Graph& g_;
  std::vector<int> best_;
  std::vector<Edge> best_cert_;
  std::vector<std::vector<int>> automorphisms_;
};

}  // namespace

std::vector<int> canonical_labeling(const Graph& g) {
  if (g.num_nodes() == 0) return {};
  return CanonicalSearch(g).run();
}

}  // namespace otgk
