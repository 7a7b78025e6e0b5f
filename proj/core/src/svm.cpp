#include "otgk/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otgk/error.hpp"

namespace otgk {
namespace {

constexpr double kTau = 1e-12;

bool is_positive_semidefinite(const Eigen::MatrixXd& gram) {
  const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  Eigen::MatrixXd shifted = gram;
  shifted.diagonal().array() += 1e-8 * scale;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  return llt.info() == Eigen::Success;
}

}  // namespace

SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels,
                   double C, const SvmOptions& options, SvmTrainInfo* info) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (gram.rows() != n || gram.cols() != n) {
    throw ContractViolation("svm_train: kernel size does not match labels");
  }
  if (!(C > 0.0)) throw ContractViolation("svm_train: C must be positive");
  bool saw_positive = false;
  bool saw_negative = false;
  for (int y : labels) {
    if (y == 1) {
      saw_positive = true;
    } else if (y == -1) {
      saw_negative = true;
    } else {
      throw ContractViolation("svm_train: labels must be +1 or -1");
    }
  }
  if (!saw_positive || !saw_negative) {
    throw ContractViolation("svm_train: training labels contain a single class");
  }
  if (!gram.allFinite()) throw ContractViolation("svm_train: non-finite kernel");
  if (options.verify_psd && !is_positive_semidefinite(gram)) {
    throw ContractViolation(
        "svm_train: kernel is not positive semidefinite; apply "
        "repair_indefinite first");
  }

  // Minimize f(a) = 1/2 a^T Q a - e^T a, Q_ij = y_i y_j K_ij.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto q = [&](Eigen::Index i, Eigen::Index j) {
    return labels[i] * labels[j] * gram(i, j);
  };
  auto in_up = [&](Eigen::Index t) {
    return (labels[t] == 1 && alpha[t] < C) || (labels[t] == -1 && alpha[t] > 0);
  };
  auto in_low = [&](Eigen::Index t) {
    return (labels[t] == -1 && alpha[t] < C) || (labels[t] == 1 && alpha[t] > 0);
  };
  auto objective = [&] {
    // -f(a) = -1/2 sum a_i (G_i - 1), using G = Q a - e.
    double value = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) value += alpha[i] * (grad[i] - 1.0);
    return -0.5 * value;
  };

  long iter = 0;
  double violation = 0.0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double score = -labels[t] * grad[t];
      if (in_up(t) && score > g_max) {
        g_max = score;
        i = t;
      }
      if (in_low(t) && score < g_min) {
        g_min = score;
        j = t;
      }
    }
    violation = g_max - g_min;
    if (i < 0 || j < 0 || violation < options.tolerance) break;

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (labels[i] != labels[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double d_i = alpha[i] - old_i;
    const double d_j = alpha[j] - old_j;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad[t] += q(t, i) * d_i + q(t, j) * d_j;
    }
    if (options.record_objective && info) {
      info->objective_trace.push_back(objective());
    }
  }

  // Bias from free vectors, else the midpoint of the feasible interval.
  double free_sum = 0.0;
  long free_count = 0;
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = labels[t] * grad[t];
    if (alpha[t] >= C) {
      if (labels[t] == -1) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0) {
      if (labels[t] == 1) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                    : 0.5 * (upper + lower);

  SvmModel model;
  model.trade_off_C = C;
  model.bias = -rho;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_indices.push_back(static_cast<int>(t));
      model.dual_coefficients.push_back(alpha[t] * labels[t]);
    }
  }
  if (info) {
    info->iterations = iter;
    info->dual_objective = objective();
    info->max_violation = violation;
  }
  return model;
}

double svm_decision(const SvmModel& model, std::span<const double> kernel_row) {
  double value = model.bias;
  for (std::size_t k = 0; k < model.support_indices.size(); ++k) {
    const auto idx = static_cast<std::size_t>(model.support_indices[k]);
    if (idx >= kernel_row.size()) {
      throw ContractViolation("svm_decision: kernel row shorter than training set");
    }
    value += model.dual_coefficients[k] * kernel_row[idx];
  }
  return value;
}

int svm_predict(const SvmModel& model, std::span<const double> kernel_row) {
  return svm_decision(model, kernel_row) >= 0.0 ? 1 : -1;
}

double svm_dual_objective(const SvmModel& model, const Eigen::MatrixXd& gram,
                          std::span<const int> labels) {
  double linear = 0.0;
  double quadratic = 0.0;
  for (std::size_t a = 0; a < model.support_indices.size(); ++a) {
    const int i = model.support_indices[a];
    linear += model.dual_coefficients[a] * labels[i];  // alpha_i
    for (std::size_t b = 0; b < model.support_indices.size(); ++b) {
      const int j = model.support_indices[b];
      quadratic += model.dual_coefficients[a] * model.dual_coefficients[b] *
                   gram(i, j);
    }
  }
  return linear - 0.5 * quadratic;
}

}  // namespace otgk
