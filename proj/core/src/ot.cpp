#include "otgk/ot.hpp"

#include <cmath>
#include <vector>

#include "network_simplex.hpp"
#include "otgk/error.hpp"

namespace otgk {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kMassTolerance = 1e-9;
constexpr double kUnderflow = 1e-300;

void check_weights(const VectorXd& w, const char* side) {
  if (w.size() == 0) {
    throw ContractViolation(std::string("OT: empty ") + side + " distribution");
  }
  if (!w.allFinite() || (w.array() < 0.0).any()) {
    throw ContractViolation(std::string("OT: negative or non-finite ") + side +
                            " weight");
  }
}

void check_shapes(const VectorXd& r, const VectorXd& c, const CostMatrix& m) {
  check_weights(r, "source");
  check_weights(c, "target");
  if (m.rows() != r.size() || m.cols() != c.size()) {
    throw ContractViolation("OT: cost matrix is " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()) + ", weights are " +
                            std::to_string(r.size()) + " and " +
                            std::to_string(c.size()));
  }
  const double rs = r.sum();
  const double cs = c.sum();
  if (std::abs(rs - cs) > kMassTolerance || rs <= 0.0) {
    throw ContractViolation("OT: infeasible problem, masses " +
                            std::to_string(rs) + " and " + std::to_string(cs) +
                            " differ");
  }
}

std::vector<Eigen::Index> positive_indices(const VectorXd& w) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) idx.push_back(i);
  }
  return idx;
}

}  // namespace

CostMatrix ground_cost(const MatrixXd& a, const MatrixXd& b,
                       GroundMetric metric) {
  if (a.rows() == 0 || b.rows() == 0) {
    throw ContractViolation("ground_cost: empty point set");
  }
  if (a.cols() != b.cols()) {
    throw ContractViolation("ground_cost: dimension mismatch (" +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.cols()) + ")");
  }
  CostMatrix out;
  out.metric = metric;
  out.entries.resize(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (metric == GroundMetric::kEuclidean) {
        out.entries(i, j) = (a.row(i) - b.row(j)).norm();
      } else {
        out.entries(i, j) =
            static_cast<double>((a.row(i).array() != b.row(j).array()).count());
      }
    }
  }
  return out;
}

OtResult exact_ot(const VectorXd& r, const VectorXd& c, const CostMatrix& cost) {
  check_shapes(r, c, cost);
  if (!cost.entries.allFinite()) {
    throw ContractViolation("exact_ot: non-finite cost entry");
  }
  const VectorXd rn = r / r.sum();
  const VectorXd cn = c / c.sum();
  OtResult out;
  out.distance =
      detail::solve_transportation(rn, cn, cost.entries, &out.plan.matrix);
  return out;
}

OtResult exact_ot(const DiscreteDistribution& r, const DiscreteDistribution& c,
                  const CostMatrix& cost) {
  return exact_ot(r.weights, c.weights, cost);
}

double ot_distance(const DiscreteDistribution& r,
                   const DiscreteDistribution& c) {
  const CostMatrix cost =
      ground_cost(r.support, c.support, GroundMetric::kEuclidean);
  check_shapes(r.weights, c.weights, cost);
  return detail::solve_transportation(r.weights / r.weights.sum(),
                                      c.weights / c.weights.sum(),
                                      cost.entries, nullptr);
}

SinkhornScaling sinkhorn_scale(const MatrixXd& kernel, const VectorXd& r,
                               const VectorXd& c, int max_iter,
                               double tolerance) {
  if (kernel.rows() != r.size() || kernel.cols() != c.size()) {
    throw ContractViolation("sinkhorn: kernel shape does not match marginals");
  }
  if ((r.array() <= 0.0).any() || (c.array() <= 0.0).any()) {
    throw ContractViolation("sinkhorn: marginals must be strictly positive");
  }
  if (max_iter < 1) throw ContractViolation("sinkhorn: max_iter must be >= 1");

  auto guard = [](const VectorXd& denominator) {
    if (!(denominator.minCoeff() >= kUnderflow)) {
      throw NumericalError(
          "sinkhorn: scaling denominator underflow; use a smaller lambda or "
          "rescale the cost matrix");
    }
  };

  SinkhornScaling s;
  s.u = VectorXd::Ones(r.size());
  VectorXd ktu(c.size());
  VectorXd kv(r.size());
  for (int it = 0; it < max_iter; ++it) {
    ktu.noalias() = kernel.transpose() * s.u;
    guard(ktu);
    const VectorXd v = c.cwiseQuotient(ktu);
    kv.noalias() = kernel * v;
    guard(kv);
    VectorXd next = r.cwiseQuotient(kv);
    ++s.iterations;
    const bool settled =
        tolerance > 0.0 &&
        ((next - s.u).cwiseAbs().array() <= tolerance * next.cwiseAbs().array())
            .all();
    s.u.swap(next);
    if (settled) break;
  }
  ktu.noalias() = kernel.transpose() * s.u;
  guard(ktu);
  s.v = c.cwiseQuotient(ktu);
  return s;
}

OtResult sinkhorn(const VectorXd& r, const VectorXd& c, const CostMatrix& cost,
                  const SinkhornOptions& options) {
  check_shapes(r, c, cost);
  if (!(options.lambda > 0.0)) {
    throw ContractViolation("sinkhorn: lambda must be positive");
  }
  const auto rows = positive_indices(r);
  const auto cols = positive_indices(c);
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(cols.size());
  VectorXd rp(nr);
  VectorXd cp(nc);
  MatrixXd mp(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) rp[i] = r[rows[i]];
  for (Eigen::Index j = 0; j < nc; ++j) cp[j] = c[cols[j]];
  for (Eigen::Index j = 0; j < nc; ++j) {
    for (Eigen::Index i = 0; i < nr; ++i) mp(i, j) = cost.entries(rows[i], cols[j]);
  }
  rp /= rp.sum();
  cp /= cp.sum();

  const MatrixXd kernel = (-options.lambda * mp).array().exp().matrix();
  const SinkhornScaling s =
      sinkhorn_scale(kernel, rp, cp, options.max_iter, options.tolerance);
  const MatrixXd plan = s.u.asDiagonal() * kernel * s.v.asDiagonal();

  OtResult out;
  out.plan.matrix = MatrixXd::Zero(r.size(), c.size());
  for (Eigen::Index j = 0; j < nc; ++j) {
    for (Eigen::Index i = 0; i < nr; ++i) {
      out.plan.matrix(rows[i], cols[j]) = plan(i, j);
    }
  }
  out.distance = (plan.array() * mp.array()).sum();
  if (!std::isfinite(out.distance)) {
    throw NumericalError("sinkhorn: non-finite transport cost");
  }
  return out;
}

double graph_ot_distance(const Graph& g1, const Graph& g2, int d) {
  return ot_distance(graph_distribution(eigen_embed(g1, d)),
                     graph_distribution(eigen_embed(g2, d)));
}

double pyramid_level_distance(const PyramidEmbedding& p1,
                              const PyramidEmbedding& p2, int l) {
  return ot_distance(p1.level(l), p2.level(l));
}

}  // namespace otgk
