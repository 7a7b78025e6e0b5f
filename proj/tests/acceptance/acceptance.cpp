// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Expects the otgk CLI path as OTGK_CLI and the datasets under
// OTGK_DATA_DIR / OTGK_TEST_DATA_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "experiment.hpp"
#include "oracles.hpp"
#include "otgk/kernels.hpp"
#include "otgk/linalg.hpp"
#include "otgk/ot.hpp"
#include "otgk/rgot.hpp"
#include "otgk/tu_format.hpp"
#include "test_util.hpp"

namespace ex = otgk::experiment;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

otgk::CostMatrix random_cost(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  otgk::CostMatrix c;
  c.entries.resize(n, m);
  for (Eigen::Index i = 0; i < c.entries.size(); ++i) c.entries.data()[i] = unit(rng);
  return c;
}

// Integer masses summing to `total`, each at least 1.
std::vector<int> integer_masses(std::mt19937_64& rng, int n, int total) {
  std::vector<int> out(n, 1);
  for (int k = n; k < total; ++k) ++out[rng() % n];
  return out;
}

void exact_ot_check() {
  Stopwatch clock;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int tree_cases = 0;
  int integral_cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const int m = 1 + static_cast<int>(rng() % 6);
    const auto cost = random_cost(rng, n, m);
    double ours = 0.0;
    double reference = 0.0;
    if (oracle::spanning_tree_count(n, m) <= 4e5) {
      const VectorXd r = testutil::random_simplex(rng, n);
      const VectorXd c = testutil::random_simplex(rng, m);
      ours = otgk::exact_ot(r, c, cost).distance;
      reference = oracle::lp_vertex_ot(r, c, cost.entries);
      ++tree_cases;
    } else {
      // Integral masses: every vertex of the polytope is an integral plan.
      const int total = 8;
      const auto a = integer_masses(rng, n, total);
      const auto b = integer_masses(rng, m, total);
      VectorXd r(n), c(m);
      for (int i = 0; i < n; ++i) r[i] = a[i] / static_cast<double>(total);
      for (int j = 0; j < m; ++j) c[j] = b[j] / static_cast<double>(total);
      ours = otgk::exact_ot(r, c, cost).distance;
      reference = oracle::birkhoff_ot(a, b, cost.entries);
      ++integral_cases;
    }
    worst = std::max(worst, std::abs(ours - reference));
  }
  const double t = clock.seconds();
  report("exact OT matches vertex-enumeration oracle", worst < 1e-8 && t < 10.0,
         fmt("200 instances (%d spanning-tree, %d integral), max |diff| %.3g, %.2f s",
             tree_cases, integral_cases, worst, t));
}

void sinkhorn_check() {
  Stopwatch clock;
  std::mt19937_64 rng(202);
  double worst_gap = 0.0;
  double worst_rise = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd r = testutil::random_simplex(rng, 4);
    const VectorXd c = testutil::random_simplex(rng, 4);
    const auto cost = random_cost(rng, 4, 4);
    const double exact = otgk::exact_ot(r, c, cost).distance;
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {1.0, 5.0, 10.0, 50.0}) {
      const double d = otgk::sinkhorn(r, c, cost, {lambda, 1000, 0.0}).distance;
      worst_rise = std::max(worst_rise, d - previous);
      previous = d;
      if (lambda == 50.0) worst_gap = std::max(worst_gap, std::abs(d - exact));
    }
  }
  const double t = clock.seconds();
  report("Sinkhorn approaches exact OT, monotone in lambda",
         worst_gap < 1e-2 && worst_rise <= 1e-9 && t < 10.0,
         fmt("50 instances, max |d(50) - exact| %.3g, max rise %.3g, %.2f s", worst_gap,
             worst_rise, t));
}

void spectral_check() {
  Stopwatch clock;
  std::mt19937_64 rng(303);
  double worst_reconstruction = 0.0;
  double worst_idempotence = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 50);
    const MatrixXd m = testutil::random_symmetric(rng, n);
    const auto eig = otgk::symmetric_eig(m);
    worst_reconstruction = std::max(worst_reconstruction, (eig.reconstruct() - m).norm());
    const MatrixXd once = otgk::psd_project(m);
    worst_idempotence = std::max(
        worst_idempotence, (otgk::psd_project(once) - once).cwiseAbs().maxCoeff());
  }
  const double t = clock.seconds();
  report("spectral decomposition and PSD projection",
         worst_reconstruction < 1e-8 && worst_idempotence < 1e-10 && t < 30.0,
         fmt("100 matrices up to 50x50, reconstruction %.3g, idempotence %.3g, %.2f s",
             worst_reconstruction, worst_idempotence, t));
}

void kernel_identity_check() {
  std::mt19937_64 rng(404);
  const auto ds = testutil::random_dataset(rng, 12, 1, 10);
  const otgk::BaseKernelSpec spec{otgk::BaseKernelKind::kLaplacian, 1.0};

  bool diagonal_exact = true;
  for (int levels : {2, 4}) {
    otgk::PgOtOptions pg;
    pg.levels = levels;
    const auto gram = otgk::pg_ot_gram(ds, pg, spec);
    const double expected = levels * otgk::base_kernel(0.0, spec);
    for (Eigen::Index i = 0; i < gram.size(); ++i) {
      diagonal_exact = diagonal_exact && gram.entries(i, i) == expected;
    }
  }

  std::vector<MatrixXd> grams;
  grams.push_back(otgk::pg_ot_gram(ds, {}, spec).entries);
  otgk::SgOtOptions sg;
  grams.push_back(otgk::sg_ot_gram(ds, sg, spec).entries);
  sg.variant = otgk::SubgraphEmbedding::kPyramid;
  grams.push_back(otgk::sg_ot_gram(ds, sg, spec).entries);
  otgk::RgotConfig rg;
  rg.max_iter = 5;
  grams.push_back(otgk::learn_rg_ot(otgk::gvec_representation(ds, 3, 2), rg).entries);
  double worst_asymmetry = 0.0;
  for (const auto& g : grams) {
    worst_asymmetry = std::max(worst_asymmetry, (g - g.transpose()).cwiseAbs().maxCoeff());
  }

  double worst_isomorphic = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const double p = 0.1 + 0.1 * static_cast<double>(rng() % 8);
    const auto g = testutil::random_graph(rng, n, p);
    const auto h = g.permuted(testutil::random_permutation(rng, n));
    worst_isomorphic = std::max(worst_isomorphic, otgk::graph_ot_distance(g, h));
  }
  report("kernel identities",
         diagonal_exact && worst_asymmetry <= 1e-10 && worst_isomorphic < 1e-8,
         fmt("PG-OT diagonal == L k(0): %s; max asymmetry over PG/SG/SG-pyramid/RG %.3g; "
             "500 relabeled pairs (n <= 10), max distance %.3g",
             diagonal_exact ? "yes" : "no", worst_asymmetry, worst_isomorphic));
}

void rgot_check() {
  Stopwatch clock;
  std::mt19937_64 rng(505);
  double worst_min_eig = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    const int count = 5 + static_cast<int>(rng() % 6);
    const auto ds = testutil::random_dataset(rng, count, 3, 10);
    otgk::RgotConfig cfg;
    cfg.sinkhorn_lambda = 0.1 * (1 + trial % 4);
    const auto k = otgk::learn_rg_ot(otgk::gvec_representation(ds, 6, 4), cfg);
    worst_min_eig = std::min(worst_min_eig, otgk::min_eigenvalue(k.entries));
  }
  const auto ds = testutil::random_dataset(rng, 8, 3, 10);
  const auto gvecs = otgk::gvec_representation(ds, 6, 4);
  otgk::RgotConfig huge;
  huge.C = 1e9;
  huge.max_iter = 1;
  const auto k = otgk::learn_rg_ot(gvecs, huge);
  const MatrixXd k0 = gvecs.columns.transpose() * gvecs.columns;
  const double limit_gap = (k.entries - otgk::psd_project(k0)).norm();
  report("RG-OT output is PSD; C -> infinity limit",
         worst_min_eig >= -1e-8 && limit_gap < 1e-6,
         fmt("20 datasets of 5-10 graphs, min eigenvalue %.3g; C=1e9 gap %.3g; %.2f s",
             worst_min_eig, limit_gap, clock.seconds()));
}

std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return out;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) out.append(buffer, got);
  const int status = pclose(pipe);
  if (status != 0) out += "\n<exit status " + std::to_string(status) + ">";
  return out;
}

void determinism_check() {
  Stopwatch clock;
  const auto work = testutil::temp_dir("bench");
  const std::string toy = (testutil::test_data_dir() / "TOY").string();
  const std::string mutag = (testutil::data_dir() / "MUTAG").string();
  auto command = [&](const std::string& cache) {
    return std::string(OTGK_CLI) + " bench --dataset " + toy +
           " --folds 5 --repeats 2 --inner-folds 3 --cache-dir " + (work / cache).string() +
           " --run '--method sg_ot' --run '--method pg_ot'"
           " --run '--method sg_ot --sg-variant pyramid --embed-dim 3 --levels 2'"
           " --run '--method rg_ot --embed-dim 3 --levels 2 --rgot-max-iter 5'"
           " --run '--dataset " + mutag + " --method sg_ot --folds 10 --repeats 2'"
           " 2>/dev/null";
  };
  const std::string first = capture(command("cache-a"));
  const std::string second = capture(command("cache-b"));
  const std::string cached = capture(command("cache-a"));
  std::size_t rows = 0;
  for (char ch : first) rows += ch == '\n';
  const bool ok = !first.empty() && first == second && first == cached &&
                  first.find("failed") == std::string::npos &&
                  first.find("<exit status") == std::string::npos;
  report("bench determinism", ok,
         fmt("3 runs (2 fresh caches, 1 warm) of a %zu-line CSV are %s, %.2f s", rows,
             first == second && first == cached ? "byte-identical" : "DIFFERENT",
             clock.seconds()));
  if (!ok) std::printf("%s\n---\n%s\n", first.c_str(), second.c_str());
}

void mutag_check() {
  Stopwatch clock;
  ex::ExperimentConfig cfg;
  cfg.dataset_dir = testutil::data_dir() / "MUTAG";
  cfg.cache_dir.clear();
  const ex::Logger quiet = [](const std::string&) {};
  const auto ds = ex::load_dataset(cfg);
  cfg.method = "sg_ot";
  const auto sg = ex::run_classify(ds, cfg, quiet);
  cfg.method = "pg_ot";
  const auto pg = ex::run_classify(ds, cfg, quiet);
  const double t = clock.seconds();
  const double sg_mean = sg.report.mean_accuracy;
  const double pg_mean = pg.report.mean_accuracy;
  report("MUTAG accuracy (SG-OT >= 80%, SG-OT >= PG-OT)",
         sg_mean >= 80.0 && sg_mean >= pg_mean && t < 1800.0,
         fmt("10x10 CV: SG-OT %s, PG-OT %s, %.1f s",
             ex::format_mean_std(sg_mean, sg.report.std_accuracy).c_str(),
             ex::format_mean_std(pg_mean, pg.report.std_accuracy).c_str(), t));
  std::printf("note: reference values SG-OT 88.72, PG-OT 85.57; gaps %.2f and %.2f points\n",
              88.72 - sg_mean, 85.57 - pg_mean);
}

void parser_check() {
  const auto ds = otgk::parse_tu_dataset(testutil::data_dir() / "MUTAG", "MUTAG");
  std::mt19937_64 rng(606);
  int round_trips = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto synthetic = testutil::random_dataset(rng, 1 + static_cast<int>(rng() % 15), 1, 12);
    synthetic.name = "SYN";
    if (trial % 2) {
      for (auto& g : synthetic.graphs) {
        std::vector<int> labels(g.num_nodes());
        for (int& l : labels) l = static_cast<int>(rng() % 5);
        g = otgk::Graph(g.num_nodes(), g.edges(), labels);
      }
    }
    const auto dir = testutil::temp_dir("accept-tu");
    otgk::write_tu_dataset(synthetic, dir);
    const auto back = otgk::parse_tu_dataset(dir, "SYN");
    round_trips += back.graphs == synthetic.graphs &&
                   back.class_labels == synthetic.class_labels;
  }
  report("TU parser", ds.size() == 188 && ds.distinct_labels().size() == 2 && round_trips == 20,
         fmt("MUTAG %zu graphs, %zu classes; %d/20 synthetic round trips", ds.size(),
             ds.distinct_labels().size(), round_trips));
}

}  // namespace

int main() {
  const std::vector<void (*)()> checks = {exact_ot_check, sinkhorn_check,  spectral_check,
                                          kernel_identity_check, rgot_check, determinism_check,
                                          mutag_check, parser_check};
  for (auto check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report("check aborted", false, e.what());
    }
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
