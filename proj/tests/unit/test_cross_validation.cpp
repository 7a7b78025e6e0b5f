#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "otgk/cross_validation.hpp"
#include "otgk/error.hpp"
#include "test_util.hpp"

using Eigen::MatrixXd;

namespace {

// Gaussian kernel on (nodes, edges): PSD and cheap.
MatrixXd size_kernel(const otgk::GraphDataset& ds) {
  const auto n = static_cast<Eigen::Index>(ds.size());
  MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dn = ds.graphs[i].num_nodes() - ds.graphs[j].num_nodes();
      const double de = static_cast<double>(ds.graphs[i].num_edges()) -
                        static_cast<double>(ds.graphs[j].num_edges());
      k(i, j) = std::exp(-0.05 * (dn * dn + de * de));
    }
  }
  return k;
}

// Block-diagonal ones by class: leaks the label, so CV must be perfect.
MatrixXd label_kernel(const std::vector<int>& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
  }
  return k;
}

otgk::GraphDataset labeled(std::mt19937_64& rng, const std::vector<int>& labels) {
  auto ds = testutil::random_dataset(rng, static_cast<int>(labels.size()), 3, 12);
  ds.class_labels = labels;
  return ds;
}

otgk::CvOptions quick() {
  otgk::CvOptions o;
  o.folds = 5;
  o.repeats = 3;
  o.inner_folds = 3;
  o.c_grid = {0.1, 1.0, 10.0};
  return o;
}

}  // namespace

TEST(StratifiedFolds, PartitionAndBalance) {
  std::mt19937_64 rng(1);
  std::vector<int> labels;
  for (int i = 0; i < 37; ++i) labels.push_back(i % 3 == 0 ? 1 : -1);
  const auto ds = labeled(rng, labels);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto folds = otgk::stratified_folds(ds, 10, seed);
    ASSERT_EQ(folds.size(), ds.size());
    std::map<int, std::map<int, int>> per_class;  // class -> fold -> count
    for (std::size_t i = 0; i < folds.size(); ++i) {
      ASSERT_GE(folds[i], 0);
      ASSERT_LT(folds[i], 10);
      ++per_class[labels[i]][folds[i]];
    }
    for (const auto& [label, counts] : per_class) {
      int lo = 1 << 30, hi = 0;
      for (int f = 0; f < 10; ++f) {
        const int c = counts.count(f) ? counts.at(f) : 0;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      EXPECT_LE(hi - lo, 1) << "class " << label;
    }
  }
}

TEST(StratifiedFolds, SeedChangesAssignmentOrderDoesNot) {
  std::mt19937_64 rng(2);
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i % 2 ? 1 : -1);
  const auto ds = labeled(rng, labels);
  EXPECT_NE(otgk::stratified_folds(ds, 5, 1), otgk::stratified_folds(ds, 5, 2));

  const auto perm = testutil::random_permutation(rng, 30);
  otgk::GraphDataset shuffled = ds;
  for (int i = 0; i < 30; ++i) {
    shuffled.graphs[perm[i]] = ds.graphs[i];
    shuffled.class_labels[perm[i]] = ds.class_labels[i];
  }
  const auto a = otgk::stratified_folds(ds, 5, 9);
  const auto b = otgk::stratified_folds(shuffled, 5, 9);
  for (int i = 0; i < 30; ++i) EXPECT_EQ(a[i], b[perm[i]]);
}

TEST(StratifiedFolds, TooFewGraphs) {
  std::mt19937_64 rng(3);
  const auto ds = labeled(rng, {1, -1, 1});
  EXPECT_THROW(otgk::stratified_folds(ds, 10, 1), otgk::ContractViolation);
}

TEST(CrossValidate, LeakedLabelsGivePerfectAccuracy) {
  std::mt19937_64 rng(4);
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(i % 2 ? 1 : -1);
  auto ds = labeled(rng, labels);
  // Every graph twice.
  const auto copy = ds;
  ds.graphs.insert(ds.graphs.end(), copy.graphs.begin(), copy.graphs.end());
  ds.class_labels.insert(ds.class_labels.end(), copy.class_labels.begin(), copy.class_labels.end());
  const std::vector<otgk::KernelCandidate> cands = {{{{"kernel", "oracle"}}, label_kernel(ds.class_labels)}};
  const auto report = otgk::cross_validate(ds, cands, quick());
  EXPECT_DOUBLE_EQ(report.mean_accuracy, 100.0);
  EXPECT_DOUBLE_EQ(report.std_accuracy, 0.0);
  EXPECT_EQ(report.per_fold.size(), 15u);
  EXPECT_EQ(report.best_hyperparameters.at("kernel"), "oracle");
  EXPECT_TRUE(report.best_hyperparameters.count("C"));
}

TEST(CrossValidate, MulticlassOneVsRest) {
  std::mt19937_64 rng(5);
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i % 3);
  const auto ds = labeled(rng, labels);
  const std::vector<otgk::KernelCandidate> cands = {{{}, label_kernel(labels)}};
  EXPECT_DOUBLE_EQ(otgk::cross_validate(ds, cands, quick()).mean_accuracy, 100.0);
}

TEST(CrossValidate, IdentityGramFallsToMajorityRate) {
  // With K = I a test row is all zeros, so every prediction is sign(b).
  std::mt19937_64 rng(6);
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i % 10 < 7 ? 1 : -1);
  const auto ds = labeled(rng, labels);
  const std::vector<otgk::KernelCandidate> cands = {{{}, MatrixXd::Identity(60, 60)}};
  auto options = quick();
  options.repeats = 5;
  const auto report = otgk::cross_validate(ds, cands, options);
  EXPECT_NEAR(report.mean_accuracy, 70.0, 5.0);
}

TEST(CrossValidate, InvariantToDatasetOrder) {
  std::mt19937_64 rng(7);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i % 2 ? 1 : -1);
  const auto ds = labeled(rng, labels);
  const auto perm = testutil::random_permutation(rng, 40);
  otgk::GraphDataset shuffled = ds;
  for (int i = 0; i < 40; ++i) {
    shuffled.graphs[perm[i]] = ds.graphs[i];
    shuffled.class_labels[perm[i]] = ds.class_labels[i];
  }
  const std::vector<otgk::KernelCandidate> a = {{{}, size_kernel(ds)}};
  const std::vector<otgk::KernelCandidate> b = {{{}, size_kernel(shuffled)}};
  const auto ra = otgk::cross_validate(ds, a, quick());
  const auto rb = otgk::cross_validate(shuffled, b, quick());
  EXPECT_EQ(ra.mean_accuracy, rb.mean_accuracy);
  EXPECT_EQ(ra.repeat_means, rb.repeat_means);
}

TEST(CrossValidate, ReportStatisticsAndThreadInvariance) {
  std::mt19937_64 rng(8);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i % 2 ? 1 : -1);
  const auto ds = labeled(rng, labels);
  const std::vector<otgk::KernelCandidate> cands = {{{{"gamma", "0.05"}}, size_kernel(ds)},
                                                   {{{"gamma", "id"}}, MatrixXd::Identity(40, 40)}};
  auto options = quick();
  options.threads = 1;
  const auto serial = otgk::cross_validate(ds, cands, options);
  options.threads = 3;
  const auto parallel = otgk::cross_validate(ds, cands, options);
  EXPECT_EQ(serial.mean_accuracy, parallel.mean_accuracy);
  EXPECT_EQ(serial.best_hyperparameters, parallel.best_hyperparameters);

  ASSERT_EQ(serial.repeat_means.size(), 3u);
  double total = 0.0;
  for (const auto& f : serial.per_fold) total += f.accuracy;
  EXPECT_NEAR(serial.mean_accuracy, total / serial.per_fold.size(), 1e-9);
  const double m = (serial.repeat_means[0] + serial.repeat_means[1] + serial.repeat_means[2]) / 3.0;
  double var = 0.0;
  for (double r : serial.repeat_means) var += (r - m) * (r - m);
  EXPECT_NEAR(serial.std_accuracy, std::sqrt(var / 3.0), 1e-9);
  EXPECT_GE(serial.mean_accuracy, 0.0);
  EXPECT_LE(serial.mean_accuracy, 100.0);
  EXPECT_GE(serial.std_fold_accuracy, 0.0);
}

TEST(CrossValidate, Errors) {
  std::mt19937_64 rng(9);
  const auto small = labeled(rng, {1, -1, 1, -1});
  const std::vector<otgk::KernelCandidate> id4 = {{{}, MatrixXd::Identity(4, 4)}};
  EXPECT_THROW(otgk::cross_validate(small, id4, quick()), otgk::ContractViolation);

  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(i % 2 ? 1 : -1);
  const auto ds = labeled(rng, labels);
  MatrixXd indefinite = MatrixXd::Identity(10, 10);
  indefinite(0, 1) = indefinite(1, 0) = 3.0;
  const std::vector<otgk::KernelCandidate> bad = {{{}, indefinite}};
  try {
    otgk::cross_validate(ds, bad, quick());
    FAIL() << "expected ContractViolation";
  } catch (const otgk::ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("repair_indefinite"), std::string::npos);
  }
  const std::vector<otgk::KernelCandidate> wrong_size = {{{}, MatrixXd::Identity(9, 9)}};
  EXPECT_THROW(otgk::cross_validate(ds, wrong_size, quick()), otgk::ContractViolation);
  const std::vector<otgk::KernelCandidate> none;
  EXPECT_THROW(otgk::cross_validate(ds, none, quick()), otgk::ContractViolation);
}
