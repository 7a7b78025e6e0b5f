#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otgk/embeddings.hpp"
#include "otgk/graph.hpp"

namespace otgk {

enum class KernelMethod { kPgOt, kSgOtEigen, kSgOtPyramid, kRgOt };
enum class BaseKernelKind { kLaplacian, kGaussian, kLinear };
enum class RepairMethod { kNone, kClip, kFlip, kShift };

std::string to_string(KernelMethod method);
std::string to_string(BaseKernelKind kind);
std::string to_string(RepairMethod method);
KernelMethod parse_kernel_method(const std::string& text);
BaseKernelKind parse_base_kernel(const std::string& text);
RepairMethod parse_repair_method(const std::string& text);

struct BaseKernelSpec {
  BaseKernelKind kind = BaseKernelKind::kLaplacian;
  double bandwidth = 1.0;

  // Throws ContractViolation unless bandwidth > 0 (laplacian / gaussian).
  void validate() const;
};

struct GramMatrix {
  Eigen::MatrixXd entries;
  KernelMethod method = KernelMethod::kPgOt;
  std::optional<double> min_eigenvalue;
  RepairMethod repaired = RepairMethod::kNone;
  // Ordered key/value pairs describing how the matrix was built.
  std::vector<std::pair<std::string, std::string>> parameters;

  Eigen::Index size() const noexcept { return entries.rows(); }
};

// laplacian: exp(-b d); gaussian: exp(-b d^2); linear: -d.
double base_kernel(double distance, const BaseKernelSpec& spec);

struct PgOtOptions {
  int levels = 4;
  int embed_dim = kDefaultEmbedDim;
  unsigned threads = 0;
};

enum class SubgraphEmbedding { kEigen, kPyramid };

struct SgOtOptions {
  int radius = kDefaultSubgraphRadius;
  int embed_dim = kDefaultEmbedDim;
  SubgraphEmbedding variant = SubgraphEmbedding::kEigen;
  // Pyramid levels per subgraph (pyramid variant only).
  int levels = 4;
  // Divide each double sum by M * N. False gives the plain double sum.
  bool normalize = true;
  unsigned threads = 0;
};

// Entry (i, j) = sum over levels l of k_base(level-l OT distance).
GramMatrix pg_ot_gram(const GraphDataset& ds, const PgOtOptions& options,
                      const BaseKernelSpec& spec);

// One Gram per base kernel; the OT distances are computed once and shared.
std::vector<GramMatrix> pg_ot_grams(const GraphDataset& ds,
                                    const PgOtOptions& options,
                                    std::span<const BaseKernelSpec> specs);

// Entry (i, j) = sum over the M x N subgraph pairs of the base kernel of
// their eigen OT distance (or their PG-OT value, pyramid variant), divided
// by M * N when options.normalize is set.
GramMatrix sg_ot_gram(const GraphDataset& ds, const SgOtOptions& options,
                      const BaseKernelSpec& spec);

std::vector<GramMatrix> sg_ot_grams(const GraphDataset& ds,
                                    const SgOtOptions& options,
                                    std::span<const BaseKernelSpec> specs);

struct PsdCheck {
  bool is_psd = false;
  double min_eigenvalue = 0.0;
};

// True iff the smallest eigenvalue is >= -tol. Records it on `gram`.
PsdCheck check_psd(GramMatrix& gram, double tol = 1e-8);

// clip: negative eigenvalues set to zero; flip: eigenvalues replaced by their
// absolute values; shift: (-min_eig + 1e-10) I added when min_eig < 0.
// Inputs that are already PSD (min eigenvalue >= 0) come back unchanged.
GramMatrix repair_indefinite(const GramMatrix& gram, RepairMethod method);

}  // namespace otgk
