#include "otgk/rgot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "otgk/embeddings.hpp"
#include "otgk/error.hpp"
#include "otgk/linalg.hpp"
#include "otgk/ot.hpp"
#include "otgk/parallel.hpp"

namespace otgk {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kFloor = 1e-12;
// Rows of i processed per parallel batch; partial sums are added in index
// order so the result does not depend on the thread count.
constexpr std::size_t kBatch = 16;

VectorXd to_simplex(VectorXd v) {
  v = v.cwiseMax(kFloor);
  return v / v.sum();
}

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

void RgotConfig::validate() const {
  if (!(sinkhorn_lambda > 0.0) || !(C > 0.0) || max_iter < 1 ||
      sinkhorn_max_iter < 1 || sinkhorn_tolerance < 0.0 ||
      convergence_tolerance < 0.0) {
    throw ContractViolation(
        "RgotConfig: lambda, C, max_iter and sinkhorn_max_iter must be positive");
  }
}

GraphVectorSet gvec_representation(const GraphDataset& ds, int d, int levels) {
  ds.validate();
  if (ds.size() == 0) throw ContractViolation("gvec_representation: empty dataset");
  const double cells = std::ldexp(1.0, levels);
  std::vector<std::map<std::vector<long>, double>> histograms(ds.size());
  std::map<std::vector<long>, Eigen::Index> columns;
  for (std::size_t g = 0; g < ds.size(); ++g) {
    const NodeEmbedding unit = to_unit_hypercube(eigen_embed(ds.graphs[g], d));
    const DiscreteDistribution h = pyramid_histogram(unit.coordinates, levels);
    for (Eigen::Index p = 0; p < h.size(); ++p) {
      std::vector<long> cell(h.dimension());
      for (Eigen::Index k = 0; k < h.dimension(); ++k) {
        cell[k] = std::lround(h.support(p, k) * cells - 0.5);
      }
      histograms[g][cell] += h.weights[p];
      columns.emplace(cell, 0);
    }
  }
  Eigen::Index next = 0;
  for (auto& [cell, index] : columns) index = next++;

  GraphVectorSet out;
  out.columns = MatrixXd::Zero(next, static_cast<Eigen::Index>(ds.size()));
  for (std::size_t g = 0; g < ds.size(); ++g) {
    VectorXd col = VectorXd::Zero(next);
    for (const auto& [cell, weight] : histograms[g]) col[columns.at(cell)] = weight;
    out.columns.col(static_cast<Eigen::Index>(g)) = to_simplex(col);
  }
  return out;
}

GramMatrix learn_rg_ot(const GraphVectorSet& gvecs, const RgotConfig& cfg,
                       RgotTrace* trace) {
  cfg.validate();
  const Eigen::Index n = gvecs.num_graphs();
  if (n == 0) throw ContractViolation("learn_rg_ot: no graphs");
  if (!gvecs.columns.allFinite() || (gvecs.columns.array() < 0.0).any()) {
    throw ContractViolation("learn_rg_ot: graph vectors must be finite and >= 0");
  }

  const MatrixXd k0 = gvecs.columns.transpose() * gvecs.columns;
  const double k0_max = k0.maxCoeff();
  if (!(k0_max > 0.0)) throw NumericalError("learn_rg_ot: K0 has no positive entry");
  MatrixXd k = k0 / k0_max;

  std::vector<VectorXd> marginals(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    marginals[i] = to_simplex(k0.row(i).transpose());
  }

  std::vector<MatrixXd> partial;
  std::vector<double> partial_error;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    MatrixXd cost(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        cost(i, j) = k(i, i) + k(j, j) - 2.0 * k(i, j);
      }
    }
    const MatrixXd kernel = (-cfg.sinkhorn_lambda * cost).array().exp().matrix();

    MatrixXd plan_sum = MatrixXd::Zero(n, n);
    double marginal_error = 0.0;
    for (Eigen::Index start = 0; start < n;
         start += static_cast<Eigen::Index>(kBatch)) {
      const Eigen::Index stop =
          std::min<Eigen::Index>(n, start + static_cast<Eigen::Index>(kBatch));
      const auto count = static_cast<std::size_t>(stop - start);
      partial.assign(count, MatrixXd());
      partial_error.assign(count, 0.0);
      parallel_for(count, cfg.threads, [&](std::size_t offset) {
        const Eigen::Index i = start + static_cast<Eigen::Index>(offset);
        MatrixXd acc = MatrixXd::Zero(n, n);
        double worst = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
          SinkhornScaling s;
          try {
            s = sinkhorn_scale(kernel, marginals[i], marginals[j],
                               cfg.sinkhorn_max_iter, cfg.sinkhorn_tolerance);
          } catch (const NumericalError& e) {
            throw NumericalError("learn_rg_ot: pair (" + std::to_string(i) +
                                 ", " + std::to_string(j) + "): " + e.what());
          }
          const MatrixXd plan = s.u.asDiagonal() * kernel * s.v.asDiagonal();
          worst = std::max(
              worst, (plan.rowwise().sum() - marginals[i]).cwiseAbs().maxCoeff());
          acc += plan;
        }
        partial[offset] = std::move(acc);
        partial_error[offset] = worst;
      });
      for (std::size_t offset = 0; offset < count; ++offset) {
        plan_sum += partial[offset];
        marginal_error = std::max(marginal_error, partial_error[offset]);
      }
    }

    MatrixXd gradient = -2.0 * plan_sum;
    gradient.diagonal() = plan_sum.rowwise().sum() + plan_sum.colwise().sum().transpose() -
                          2.0 * plan_sum.diagonal();
    if (!gradient.allFinite()) {
      throw NumericalError("learn_rg_ot: non-finite gradient at iteration " +
                           std::to_string(iter + 1));
    }
    MatrixXd next = psd_project(k0 - gradient / cfg.C);

    const double previous_norm = k.norm();
    const double change =
        previous_norm > 0.0 ? (next - k).norm() / previous_norm : (next - k).norm();
    k = std::move(next);

    if (trace) {
      RgotIteration stats;
      stats.min_eigenvalue = min_eigenvalue(k);
      double min_cost = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          min_cost = std::min(min_cost, k(i, i) + k(j, j) - 2.0 * k(i, j));
        }
      }
      stats.min_ground_cost = min_cost;
      stats.relative_change = change;
      stats.max_marginal_error = marginal_error;
      trace->iterations.push_back(stats);
    }
    if (change < cfg.convergence_tolerance) break;
  }

  GramMatrix out;
  out.method = KernelMethod::kRgOt;
  out.entries = std::move(k);
  out.parameters = {{"method", "rg_ot"},
                    {"sinkhorn_lambda", format_double(cfg.sinkhorn_lambda)},
                    {"C", format_double(cfg.C)},
                    {"max_iter", std::to_string(cfg.max_iter)},
                    {"sinkhorn_max_iter", std::to_string(cfg.sinkhorn_max_iter)}};
  return out;
}

}  // namespace otgk
