#include "otgk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "otgk/error.hpp"
#include "otgk/linalg.hpp"
#include "otgk/ot.hpp"
#include "otgk/parallel.hpp"

namespace otgk {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Eigenvector coordinates are snapped to this binary grid before OT so that
// isomorphic subgraphs whose solver output differs only by round-off share a
// cache entry.
constexpr int kSnapBits = 40;

double snap(double x) {
  return std::ldexp(std::nearbyint(std::ldexp(x, kSnapBits)), -kSnapBits);
}

// A multi-level bag (one distribution per level) and the dedup key built
// from its exact bytes.
struct Bag {
  std::vector<DiscreteDistribution> levels;
};

std::string bag_key(const Bag& bag) {
  std::string key;
  for (const auto& level : bag.levels) {
    const auto rows = static_cast<std::uint64_t>(level.support.rows());
    const auto cols = static_cast<std::uint64_t>(level.support.cols());
    key.append(reinterpret_cast<const char*>(&rows), sizeof rows);
    key.append(reinterpret_cast<const char*>(&cols), sizeof cols);
    key.append(reinterpret_cast<const char*>(level.support.data()),
               sizeof(double) * level.support.size());
    key.append(reinterpret_cast<const char*>(level.weights.data()),
               sizeof(double) * level.weights.size());
  }
  return key;
}

// Rows sorted lexicographically, coordinates snapped; OT is invariant to the
// order of support points.
DiscreteDistribution canonical_node_distribution(const NodeEmbedding& e) {
  std::vector<std::vector<double>> rows(e.num_nodes());
  for (int i = 0; i < e.num_nodes(); ++i) {
    for (int k = 0; k < e.dimension(); ++k) {
      rows[i].push_back(snap(e.coordinates(i, k)));
    }
  }
  std::sort(rows.begin(), rows.end());
  NodeEmbedding sorted;
  sorted.coordinates.resize(e.num_nodes(), e.dimension());
  for (int i = 0; i < e.num_nodes(); ++i) {
    for (int k = 0; k < e.dimension(); ++k) sorted.coordinates(i, k) = rows[i][k];
  }
  return graph_distribution(sorted);
}

Bag eigen_bag(const Graph& g, int d) {
  return Bag{{canonical_node_distribution(eigen_embed(g, d))}};
}

Bag pyramid_bag(const Graph& g, int d, int levels) {
  return Bag{pyramid_embed(eigen_embed(g, d), levels).levels};
}

// Deduplicated bags and, for each owner (graph), the multiset of bag ids.
struct BagIndex {
  std::vector<Bag> unique;
  std::vector<std::vector<std::pair<int, int>>> owner_counts;  // (id, count)
  std::vector<int> owner_sizes;
};

BagIndex index_bags(const std::vector<std::vector<Bag>>& bags_per_owner) {
  BagIndex index;
  std::map<std::string, int> ids;
  for (const auto& bags : bags_per_owner) {
    std::map<int, int> counts;
    for (const auto& bag : bags) {
      auto [it, inserted] =
          ids.emplace(bag_key(bag), static_cast<int>(index.unique.size()));
      if (inserted) index.unique.push_back(bag);
      ++counts[it->second];
    }
    index.owner_counts.emplace_back(counts.begin(), counts.end());
    index.owner_sizes.push_back(static_cast<int>(bags.size()));
  }
  return index;
}

// Per-level OT distances between every pair of unique bags. The diagonal is
// exactly zero.
std::vector<MatrixXd> bag_distances(const std::vector<Bag>& bags,
                                    unsigned threads) {
  const std::size_t u = bags.size();
  const std::size_t levels = bags.empty() ? 0 : bags.front().levels.size();
  std::vector<MatrixXd> dist(levels, MatrixXd::Zero(u, u));
  parallel_for(u, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < u; ++j) {
      for (std::size_t l = 0; l < levels; ++l) {
        dist[l](i, j) = ot_distance(bags[i].levels[l], bags[j].levels[l]);
      }
    }
  });
  for (auto& d : dist) {
    d.triangularView<Eigen::StrictlyLower>() = d.transpose();
  }
  return dist;
}

// Item kernel between unique bags: sum over levels of k_base.
MatrixXd item_kernel(const std::vector<MatrixXd>& dist,
                     const BaseKernelSpec& spec) {
  const Eigen::Index u = dist.empty() ? 0 : dist.front().rows();
  MatrixXd k = MatrixXd::Zero(u, u);
  for (Eigen::Index j = 0; j < u; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      double sum = 0.0;
      for (const auto& d : dist) sum += base_kernel(d(i, j), spec);
      k(i, j) = sum;
      k(j, i) = sum;
    }
  }
  return k;
}

// Gram(a, b) = sum_{x in a, y in b} w_a w_b K(x, y), upper triangle mirrored.
MatrixXd aggregate(const BagIndex& index, const MatrixXd& item, bool normalize,
                   unsigned threads) {
  const std::size_t n = index.owner_counts.size();
  MatrixXd gram = MatrixXd::Zero(n, n);
  parallel_for(n, threads, [&](std::size_t a) {
    const auto& left = index.owner_counts[a];
    for (std::size_t b = a; b < n; ++b) {
      const auto& right = index.owner_counts[b];
      double sum = 0.0;
      for (const auto& [x, cx] : left) {
        double row = 0.0;
        for (const auto& [y, cy] : right) row += cy * item(x, y);
        sum += cx * row;
      }
      if (normalize) {
        sum /= static_cast<double>(index.owner_sizes[a]) *
               static_cast<double>(index.owner_sizes[b]);
      }
      gram(a, b) = sum;
    }
  });
  gram.triangularView<Eigen::StrictlyLower>() = gram.transpose();
  return gram;
}

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

void describe_base(GramMatrix& g, const BaseKernelSpec& spec) {
  g.parameters.emplace_back("base_kernel", to_string(spec.kind));
  g.parameters.emplace_back("bandwidth", format_double(spec.bandwidth));
}

std::vector<GramMatrix> assemble(const BagIndex& index,
                                 const std::vector<MatrixXd>& dist,
                                 std::span<const BaseKernelSpec> specs,
                                 bool normalize, unsigned threads,
                                 const GramMatrix& prototype) {
  std::vector<GramMatrix> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    GramMatrix g = prototype;
    g.entries = aggregate(index, item_kernel(dist, spec), normalize, threads);
    describe_base(g, spec);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

std::string to_string(KernelMethod method) {
  switch (method) {
    case KernelMethod::kPgOt: return "pg_ot";
    case KernelMethod::kSgOtEigen: return "sg_ot_eigen";
    case KernelMethod::kSgOtPyramid: return "sg_ot_pyramid";
    case KernelMethod::kRgOt: return "rg_ot";
  }
  return "unknown";
}

std::string to_string(BaseKernelKind kind) {
  switch (kind) {
    case BaseKernelKind::kLaplacian: return "laplacian";
    case BaseKernelKind::kGaussian: return "gaussian";
    case BaseKernelKind::kLinear: return "linear";
  }
  return "unknown";
}

std::string to_string(RepairMethod method) {
  switch (method) {
    case RepairMethod::kNone: return "none";
    case RepairMethod::kClip: return "clip";
    case RepairMethod::kFlip: return "flip";
    case RepairMethod::kShift: return "shift";
  }
  return "unknown";
}

KernelMethod parse_kernel_method(const std::string& text) {
  for (auto m : {KernelMethod::kPgOt, KernelMethod::kSgOtEigen,
                 KernelMethod::kSgOtPyramid, KernelMethod::kRgOt}) {
    if (text == to_string(m)) return m;
  }
  throw ContractViolation("unknown kernel method '" + text + "'");
}

BaseKernelKind parse_base_kernel(const std::string& text) {
  for (auto k : {BaseKernelKind::kLaplacian, BaseKernelKind::kGaussian,
                 BaseKernelKind::kLinear}) {
    if (text == to_string(k)) return k;
  }
  throw ContractViolation("unknown base kernel '" + text + "'");
}

RepairMethod parse_repair_method(const std::string& text) {
  for (auto r : {RepairMethod::kNone, RepairMethod::kClip, RepairMethod::kFlip,
                 RepairMethod::kShift}) {
    if (text == to_string(r)) return r;
  }
  throw ContractViolation("unknown repair method '" + text + "'");
}

void BaseKernelSpec::validate() const {
  if (kind != BaseKernelKind::kLinear && !(bandwidth > 0.0)) {
    throw ContractViolation("base kernel bandwidth must be positive");
  }
}

double base_kernel(double distance, const BaseKernelSpec& spec) {
  if (!(distance >= 0.0)) {
    throw ContractViolation("base_kernel: distance must be nonnegative");
  }
  switch (spec.kind) {
    case BaseKernelKind::kLaplacian:
      return std::exp(-spec.bandwidth * distance);
    case BaseKernelKind::kGaussian:
      return std::exp(-spec.bandwidth * distance * distance);
    case BaseKernelKind::kLinear:
      return -distance;
  }
  return 0.0;
}

std::vector<GramMatrix> pg_ot_grams(const GraphDataset& ds,
                                    const PgOtOptions& options,
                                    std::span<const BaseKernelSpec> specs) {
  ds.validate();
  if (options.levels < 1) throw ContractViolation("pg_ot: levels must be >= 1");
  for (const auto& spec : specs) spec.validate();

  std::vector<std::vector<Bag>> bags(ds.size());
  parallel_for(ds.size(), options.threads, [&](std::size_t i) {
    bags[i] = {pyramid_bag(ds.graphs[i], options.embed_dim, options.levels)};
  });
  const BagIndex index = index_bags(bags);
  const auto dist = bag_distances(index.unique, options.threads);

  GramMatrix prototype;
  prototype.method = KernelMethod::kPgOt;
  prototype.parameters = {{"method", "pg_ot"},
                          {"levels", std::to_string(options.levels)},
                          {"embed_dim", std::to_string(options.embed_dim)}};
  return assemble(index, dist, specs, false, options.threads, prototype);
}

GramMatrix pg_ot_gram(const GraphDataset& ds, const PgOtOptions& options,
                      const BaseKernelSpec& spec) {
  return std::move(pg_ot_grams(ds, options, std::span(&spec, 1)).front());
}

std::vector<GramMatrix> sg_ot_grams(const GraphDataset& ds,
                                    const SgOtOptions& options,
                                    std::span<const BaseKernelSpec> specs) {
  ds.validate();
  if (options.radius < 1) throw ContractViolation("sg_ot: radius must be >= 1");
  if (options.variant == SubgraphEmbedding::kPyramid && options.levels < 1) {
    throw ContractViolation("sg_ot: levels must be >= 1");
  }
  for (const auto& spec : specs) spec.validate();

  std::vector<std::vector<Bag>> bags(ds.size());
  parallel_for(ds.size(), options.threads, [&](std::size_t i) {
    const auto subgraphs = extract_subgraphs(ds.graphs[i], options.radius);
    if (subgraphs.empty()) {
      throw ContractViolation("sg_ot: graph " + std::to_string(i) +
                              " yields no subgraphs");
    }
    for (const auto& sub : subgraphs) {
      bags[i].push_back(options.variant == SubgraphEmbedding::kEigen
                            ? eigen_bag(sub, options.embed_dim)
                            : pyramid_bag(sub, options.embed_dim, options.levels));
    }
  });
  const BagIndex index = index_bags(bags);
  const auto dist = bag_distances(index.unique, options.threads);

  GramMatrix prototype;
  prototype.method = options.variant == SubgraphEmbedding::kEigen
                         ? KernelMethod::kSgOtEigen
                         : KernelMethod::kSgOtPyramid;
  prototype.parameters = {{"method", to_string(prototype.method)},
                          {"radius", std::to_string(options.radius)},
                          {"embed_dim", std::to_string(options.embed_dim)}};
  if (options.variant == SubgraphEmbedding::kPyramid) {
    prototype.parameters.emplace_back("levels", std::to_string(options.levels));
  }
  prototype.parameters.emplace_back("normalize",
                                    options.normalize ? "true" : "false");
  return assemble(index, dist, specs, options.normalize, options.threads,
                  prototype);
}

GramMatrix sg_ot_gram(const GraphDataset& ds, const SgOtOptions& options,
                      const BaseKernelSpec& spec) {
  return std::move(sg_ot_grams(ds, options, std::span(&spec, 1)).front());
}

PsdCheck check_psd(GramMatrix& gram, double tol) {
  if (!is_symmetric(gram.entries, 1e-10)) {
    throw ContractViolation("check_psd: Gram matrix is not symmetric");
  }
  PsdCheck out;
  out.min_eigenvalue = min_eigenvalue(gram.entries);
  out.is_psd = out.min_eigenvalue >= -tol;
  gram.min_eigenvalue = out.min_eigenvalue;
  return out;
}

GramMatrix repair_indefinite(const GramMatrix& gram, RepairMethod method) {
  if (!is_symmetric(gram.entries, 1e-10)) {
    throw ContractViolation("repair_indefinite: Gram matrix is not symmetric");
  }
  GramMatrix out = gram;
  out.repaired = method;
  if (method == RepairMethod::kNone || gram.size() == 0) return out;

  const MatrixXd sym = 0.5 * (gram.entries + gram.entries.transpose());
  const SymmetricEig eig = symmetric_eig(sym);
  const double min_eig = eig.eigenvalues.minCoeff();
  if (min_eig >= 0.0) {
    out.min_eigenvalue = min_eig;
    return out;
  }
  MatrixXd repaired;
  switch (method) {
    case RepairMethod::kClip:
      repaired = eig.eigenvectors * eig.eigenvalues.cwiseMax(0.0).asDiagonal() *
                 eig.eigenvectors.transpose();
      break;
    case RepairMethod::kFlip:
      repaired = eig.eigenvectors * eig.eigenvalues.cwiseAbs().asDiagonal() *
                 eig.eigenvectors.transpose();
      break;
    case RepairMethod::kShift:
      repaired = sym;
      repaired.diagonal().array() += -min_eig + 1e-10;
      break;
    case RepairMethod::kNone:
      break;
  }
  out.entries = 0.5 * (repaired + repaired.transpose());
  out.min_eigenvalue.reset();
  return out;
}

}  // namespace otgk
