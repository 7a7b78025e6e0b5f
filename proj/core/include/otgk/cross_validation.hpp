#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otgk/graph.hpp"

namespace otgk {

// A precomputed (PSD) Gram matrix plus the hyperparameters that produced it.
struct KernelCandidate {
  std::vector<std::pair<std::string, std::string>> parameters;
  Eigen::MatrixXd gram;
};

struct CvOptions {
  int folds = 10;
  int repeats = 10;
  // Model selection folds inside every training split.
  int inner_folds = 5;
  std::vector<double> c_grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

struct FoldResult {
  int repeat = 0;
  int fold = 0;
  double accuracy = 0.0;  // percent
  std::size_t candidate = 0;
  double C = 0.0;
};

struct CvReport {
  double mean_accuracy = 0.0;       // percent, over every repeat x fold
  double std_accuracy = 0.0;        // percent, across per-repeat means
  double std_fold_accuracy = 0.0;   // percent, across every repeat x fold
  std::vector<double> repeat_means;
  std::vector<FoldResult> per_fold;
  // Most frequently selected candidate parameters plus "C".
  std::map<std::string, std::string> best_hyperparameters;
};

// Stratified fold index (0..folds-1) per graph. Graphs are put in a canonical
// order (class label, graph fingerprint, position), each class is shuffled
// with a seeded Fisher-Yates pass and dealt round-robin across folds.
std::vector<int> stratified_folds(const GraphDataset& ds, int folds,
                                  std::uint64_t seed);

// Repeated stratified k-fold CV with nested grid selection over
// candidates x c_grid. Multiclass labels use one-vs-rest. Throws
// ContractViolation when the dataset has fewer graphs than folds or a
// candidate Gram is not PSD.
CvReport cross_validate(const GraphDataset& ds,
                        std::span<const KernelCandidate> candidates,
                        const CvOptions& options);

}  // namespace otgk
