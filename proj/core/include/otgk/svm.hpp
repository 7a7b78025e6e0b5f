#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace otgk {

// Binary C-SVM on a precomputed kernel. dual_coefficients[k] is
// alpha * y of training point support_indices[k].
struct SvmModel {
  std::vector<int> support_indices;
  std::vector<double> dual_coefficients;
  double bias = 0.0;
  double trade_off_C = 1.0;
};

struct SvmOptions {
  // KKT violation tolerance of the maximal violating pair.
  double tolerance = 1e-3;
  long max_iterations = 10'000'000;
  // Reject kernels that are not PSD (Cholesky of K + 1e-8 max(1, max K_ii) I).
  bool verify_psd = true;
  // Record the dual objective after every SMO step.
  bool record_objective = false;
};

struct SvmTrainInfo {
  long iterations = 0;
  double dual_objective = 0.0;
  double max_violation = 0.0;
  std::vector<double> objective_trace;
};

// SMO with maximal-violating-pair working set selection (lowest index on
// ties). `gram` is the training kernel, labels are +1 / -1. Throws
// ContractViolation for non-PSD kernels (repair them first), single-class
// labels or labels other than +-1.
SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels,
                   double C, const SvmOptions& options = {},
                   SvmTrainInfo* info = nullptr);

// sum_k coef_k * kernel_row[support_k] + bias.
double svm_decision(const SvmModel& model, std::span<const double> kernel_row);

// Sign of the decision value; exactly zero maps to +1.
int svm_predict(const SvmModel& model, std::span<const double> kernel_row);

// Dual objective sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij of a model
// trained on `gram`.
double svm_dual_objective(const SvmModel& model, const Eigen::MatrixXd& gram,
                          std::span<const int> labels);

}  // namespace otgk
