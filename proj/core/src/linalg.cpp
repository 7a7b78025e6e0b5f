#include "otgk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "otgk/error.hpp"

namespace otgk {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double off_diagonal_norm(const MatrixXd& a) {
  double sum = 0.0;
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

// One Jacobi rotation zeroing a(p, q); v accumulates the rotations.
void rotate(MatrixXd& a, MatrixXd& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const Eigen::Index n = a.rows();

  // Columns p and q, then rows p and q.
  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

// Orders indices by |lambda| descending; runs of equal magnitude (within tol)
// are ordered algebraically descending.
std::vector<Eigen::Index> spectral_order(const VectorXd& values, double tol) {
  std::vector<Eigen::Index> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    const double lead = std::abs(values[order[start]]);
    while (end < order.size() &&
           lead - std::abs(values[order[end]]) <= tol) {
      ++end;
    }
    std::stable_sort(order.begin() + start, order.begin() + end,
                     [&](auto a, auto b) { return values[a] > values[b]; });
    start = end;
  }
  return order;
}

void canonicalize_sign(Eigen::Ref<VectorXd> u) {
  constexpr double kTie = 1e-9;
  const double peak = u.cwiseAbs().maxCoeff();
  bool saw_positive = false;
  bool saw_negative = false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) >= peak - kTie) {
      (u[i] > 0 ? saw_positive : saw_negative) = true;
    }
  }
  bool flip = false;
  if (!(saw_positive && saw_negative)) {
    flip = saw_negative;
  } else {
    const double third_moment = u.array().cube().sum();
    if (std::abs(third_moment) > kTie) {
      flip = third_moment < 0.0;
    } else {
      // Larger sorted value sequence wins; a symmetric multiset keeps its sign.
      std::vector<double> up(u.data(), u.data() + u.size());
      std::sort(up.begin(), up.end(), std::greater<>());
      for (std::size_t i = 0; i < up.size(); ++i) {
        const double down = -up[up.size() - 1 - i];
        if (std::abs(up[i] - down) > kTie) {
          flip = down > up[i];
          break;
        }
      }
    }
  }
  if (flip) u = -u;
}

// Replaces the basis `block` (n x k, orthonormal, spanning one eigenspace of
// m) with one built from permutation-equivariant probe vectors.
void canonicalize_subspace(const MatrixXd& m, Eigen::Ref<MatrixXd> block) {
  const Eigen::Index n = block.rows();
  const Eigen::Index k = block.cols();
  const MatrixXd projector = block * block.transpose();

  std::vector<VectorXd> probes;
  const VectorXd ones = VectorXd::Ones(n);
  const VectorXd walk1 = m * ones;
  const VectorXd walk2 = m * walk1;
  const VectorXd walk3 = m * walk2;
  const VectorXd proj_diag = projector.diagonal();
  const VectorXd m2_diag = (m * m).diagonal();
  const std::vector<VectorXd> base = {ones,    walk1,     walk2, walk3,
                                      proj_diag, m2_diag};
  for (const auto& f : base) probes.push_back(f);
  for (std::size_t i = 1; i < base.size(); ++i) {
    for (std::size_t j = i; j < base.size(); ++j) {
      probes.push_back(base[i].cwiseProduct(base[j]));
    }
  }
  // Unit vectors of nodes whose invariant signature is unique.
  std::map<std::vector<long long>, std::vector<Eigen::Index>> by_signature;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<long long> key;
    for (const auto& f : base) key.push_back(std::llround(f[i] * 1e7));
    by_signature[key].push_back(i);
  }
  for (const auto& [key, nodes] : by_signature) {
    if (nodes.size() == 1) probes.push_back(VectorXd::Unit(n, nodes[0]));
  }

  MatrixXd basis(n, k);
  Eigen::Index found = 0;
  for (const auto& probe : probes) {
    if (found == k) break;
    VectorXd w = projector * probe;
    const double scale = probe.norm();
    if (scale == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < found; ++j) {
        w -= basis.col(j).dot(w) * basis.col(j);
      }
    }
    const double norm = w.norm();
    if (norm > 1e-6 * scale) basis.col(found++) = w / norm;
  }
  // Directions the probes cannot reach stay as the solver produced them.
  for (Eigen::Index c = 0; c < k && found < k; ++c) {
    VectorXd w = block.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < found; ++j) {
        w -= basis.col(j).dot(w) * basis.col(j);
      }
    }
    const double norm = w.norm();
    if (norm > 1e-6) basis.col(found++) = w / norm;
  }
  if (found == k) block = basis;
}

}  // namespace

MatrixXd SymmetricEig::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

bool is_symmetric(const MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

SymmetricEig symmetric_eig(const MatrixXd& m, const JacobiOptions& options) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ContractViolation("symmetric_eig: expected a non-empty square matrix");
  }
  if (!m.allFinite()) {
    throw ContractViolation("symmetric_eig: non-finite entries");
  }
  if (!is_symmetric(m, 1e-10)) {
    throw ContractViolation("symmetric_eig: matrix is not symmetric");
  }
  const Eigen::Index n = m.rows();
  const MatrixXd sym = 0.5 * (m + m.transpose());
  MatrixXd a = sym;
  MatrixXd v = MatrixXd::Identity(n, n);
  const double threshold = options.tolerance * std::max(1.0, a.norm());

  bool converged = off_diagonal_norm(a) < threshold;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }
    converged = off_diagonal_norm(a) < threshold;
  }
  if (!converged) {
    throw NumericalError("symmetric_eig: Jacobi did not converge in " +
                         std::to_string(options.max_sweeps) + " sweeps");
  }

  const VectorXd raw = a.diagonal();
  const double tie = 1e-9 * std::max(1.0, raw.cwiseAbs().maxCoeff());
  const auto order = spectral_order(raw, tie);

  SymmetricEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.eigenvalues[j] = raw[order[j]];
    out.eigenvectors.col(j) = v.col(order[j]);
  }

  // Repeated eigenvalues are adjacent after spectral_order.
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n &&
           std::abs(out.eigenvalues[end] - out.eigenvalues[start]) <= tie) {
      ++end;
    }
    if (end - start > 1) {
      canonicalize_subspace(sym,
                            out.eigenvectors.middleCols(start, end - start));
    }
    start = end;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    canonicalize_sign(out.eigenvectors.col(j));
  }
  return out;
}

MatrixXd psd_project(const MatrixXd& m) {
  const MatrixXd sym = 0.5 * (m + m.transpose());
  if (sym.size() == 0) return sym;
  const SymmetricEig eig = symmetric_eig(sym);
  const VectorXd clipped = eig.eigenvalues.cwiseMax(0.0);
  MatrixXd out =
      eig.eigenvectors * clipped.asDiagonal() * eig.eigenvectors.transpose();
  return 0.5 * (out + out.transpose());
}

double min_eigenvalue(const MatrixXd& m) {
  const MatrixXd sym = 0.5 * (m + m.transpose());
  return symmetric_eig(sym).eigenvalues.minCoeff();
}

}  // namespace otgk
