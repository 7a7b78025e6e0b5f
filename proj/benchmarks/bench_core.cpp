#include <random>

#include <benchmark/benchmark.h>

#include "otgk/embeddings.hpp"
#include "otgk/graph.hpp"
#include "otgk/kernels.hpp"
#include "otgk/linalg.hpp"
#include "otgk/ot.hpp"
#include "otgk/tu_format.hpp"

namespace {

Eigen::VectorXd simplex(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = unit(rng);
  return w / w.sum();
}

otgk::CostMatrix cost(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  otgk::CostMatrix c;
  c.entries.resize(n, n);
  for (Eigen::Index i = 0; i < c.entries.size(); ++i) c.entries.data()[i] = unit(rng);
  return c;
}

void BM_ExactOt(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const auto r = simplex(rng, n);
  const auto c = simplex(rng, n);
  const auto m = cost(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(otgk::exact_ot(r, c, m).distance);
}
BENCHMARK(BM_ExactOt)->Arg(8)->Arg(32)->Arg(64);

void BM_Sinkhorn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  const auto r = simplex(rng, n);
  const auto c = simplex(rng, n);
  const auto m = cost(rng, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(otgk::sinkhorn(r, c, m, {10.0, 200, 0.0}).distance);
  }
}
BENCHMARK(BM_Sinkhorn)->Arg(8)->Arg(32)->Arg(64);

void BM_SymmetricEig(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(otgk::symmetric_eig(a).eigenvalues[0]);
}
BENCHMARK(BM_SymmetricEig)->Arg(10)->Arg(28)->Arg(50);

void BM_CanonicalLabeling(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<otgk::Edge> edges;
  for (int v = 1; v < n; ++v) edges.emplace_back(0, v);
  const otgk::Graph star(n, edges);
  for (auto _ : state) benchmark::DoNotOptimize(otgk::canonical_labeling(star).data());
}
BENCHMARK(BM_CanonicalLabeling)->Arg(8)->Arg(16)->Arg(28);

void BM_SgOtGramMutag(benchmark::State& state) {
  auto ds = otgk::parse_tu_dataset(std::string(OTGK_DATA_DIR) + "/MUTAG", "MUTAG");
  ds.graphs.resize(static_cast<std::size_t>(state.range(0)));
  ds.class_labels.resize(ds.graphs.size());
  const otgk::BaseKernelSpec spec{otgk::BaseKernelKind::kLaplacian, 1.0};
  otgk::SgOtOptions options;
  options.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(otgk::sg_ot_gram(ds, options, spec).entries.sum());
}
BENCHMARK(BM_SgOtGramMutag)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
