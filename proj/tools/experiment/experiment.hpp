#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "otgk/cross_validation.hpp"
#include "otgk/graph.hpp"
#include "otgk/kernels.hpp"
#include "otgk/rgot.hpp"

namespace otgk::experiment {

// Bad flags, paths or values. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::filesystem::path dataset_dir;
  std::string dataset_name;  // defaults to the directory name
  std::string method = "sg_ot";  // pg_ot | sg_ot | rg_ot
  std::string sg_variant = "eigen";  // eigen | pyramid
  int embed_dim = kDefaultEmbedDim;
  std::vector<int> levels = {4};
  int radius = kDefaultSubgraphRadius;
  bool sg_normalize = true;
  std::string base_kernel = "laplacian";
  std::vector<double> bandwidths = {0.1, 1.0, 10.0};
  std::vector<double> rgot_lambdas = {0.1};
  double rgot_C = 200.0;
  int rgot_max_iter = 100;
  int rgot_sinkhorn_iter = 200;
  std::string repair = "clip";
  std::vector<double> svm_c = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  int folds = 10;
  int repeats = 10;
  int inner_folds = 5;
  std::uint64_t seed = 42;
  std::filesystem::path output;
  std::filesystem::path cache_dir = ".otgk-cache";  // empty disables caching
  unsigned threads = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
  // Method label used in tables, e.g. "sg_ot" or "sg_ot_pyramid".
  std::string label() const;
  nlohmann::ordered_json to_json() const;
};

using Logger = std::function<void(const std::string&)>;

// Throws ConfigError when the directory does not exist.
GraphDataset load_dataset(const ExperimentConfig& cfg);

struct GramRun {
  std::vector<GramMatrix> grams;  // one per candidate, unrepaired
  std::vector<bool> from_cache;
};

// One Gram per hyperparameter candidate (levels x bandwidths, or the RG-OT
// lambda grid). Cached Grams are reused when their key matches.
GramRun compute_grams(const GraphDataset& ds, const ExperimentConfig& cfg,
                      const Logger& log);

// Cache key of one candidate: dataset content hash plus every parameter.
std::uint64_t cache_key(const GraphDataset& ds,
                        const std::vector<std::pair<std::string, std::string>>& params);

struct ClassifyResult {
  CvReport report;
  std::vector<GramMatrix> grams;  // as used for CV, after repair
  std::vector<double> raw_min_eigenvalues;
  double load_seconds = 0.0;
  double gram_seconds = 0.0;
  double cv_seconds = 0.0;
};

ClassifyResult run_classify(const GraphDataset& ds, const ExperimentConfig& cfg,
                            const Logger& log);

nlohmann::ordered_json report_json(const GraphDataset& ds,
                                   const ExperimentConfig& cfg,
                                   const ClassifyResult& result);

// "84.05±1.18"
std::string format_mean_std(double mean, double std);

// method,dataset,accuracy table. Rows of failed runs carry the error text.
struct BenchRow {
  std::string method;
  std::string dataset;
  std::string accuracy;
  std::string status;
};

std::vector<BenchRow> run_bench(const std::vector<ExperimentConfig>& runs,
                                const Logger& log);
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace otgk::experiment
