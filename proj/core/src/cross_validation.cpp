#include "otgk/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include "otgk/error.hpp"
#include "otgk/linalg.hpp"
#include "otgk/parallel.hpp"
#include "otgk/svm.hpp"

namespace otgk {
namespace {

using Eigen::MatrixXd;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 over the combined words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform integer in [0, bound] by rejection; std::uniform_int_distribution
// is implementation-defined and would make folds platform-dependent.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t range = bound + 1;
  if (range == 0) return rng();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

template <typename T>
void fisher_yates(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[bounded(rng, i - 1)]);
  }
}

// Canonical rank of each graph: by (label, fingerprint, position).
std::vector<int> canonical_ranks(const GraphDataset& ds) {
  std::vector<std::tuple<int, std::uint64_t, std::size_t>> keys;
  keys.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    keys.emplace_back(ds.class_labels[i], ds.graphs[i].fingerprint(), i);
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return keys[a] < keys[b]; });
  std::vector<int> rank(ds.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);
  return rank;
}

// Fold of each item in `items` (already in canonical order).
std::vector<int> stratify(const std::vector<int>& items,
                          const std::vector<int>& labels, int folds,
                          std::uint64_t seed) {
  std::vector<int> classes;
  for (int idx : items) classes.push_back(labels[idx]);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::mt19937_64 rng(seed);
  std::vector<int> fold(items.size(), 0);
  int next = 0;
  for (int cls : classes) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (labels[items[k]] == cls) members.push_back(k);
    }
    fisher_yates(members, rng);
    for (std::size_t k : members) {
      fold[k] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

// Binary problem per class (one-vs-rest), or one problem for two classes.
class Classifier {
 public:
  Classifier(const MatrixXd& gram, const std::vector<int>& labels,
             const std::vector<int>& train, double C) {
    for (int idx : train) classes_.push_back(labels[idx]);
    std::sort(classes_.begin(), classes_.end());
    classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());

    const auto n = static_cast<Eigen::Index>(train.size());
    MatrixXd sub(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = gram(train[a], train[b]);
    }
    train_ = train;
    SvmOptions options;
    options.verify_psd = false;

    const std::size_t problems = classes_.size() <= 2 ? 1 : classes_.size();
    for (std::size_t p = 0; p < problems; ++p) {
      const int positive = classes_.size() <= 2 ? classes_.back() : classes_[p];
      std::vector<int> y(train.size());
      for (std::size_t k = 0; k < train.size(); ++k) {
        y[k] = labels[train[k]] == positive ? 1 : -1;
      }
      const bool mixed = std::any_of(y.begin(), y.end(), [](int v) { return v == 1; }) &&
                         std::any_of(y.begin(), y.end(), [](int v) { return v == -1; });
      if (mixed) {
        models_.push_back(svm_train(sub, y, C, options));
      } else {
        SvmModel constant;
        constant.bias = y.empty() ? 1.0 : y.front();
        constant.trade_off_C = C;
        models_.push_back(constant);
      }
    }
  }

  int predict(const MatrixXd& gram, int graph) const {
    row_.resize(train_.size());
    for (std::size_t k = 0; k < train_.size(); ++k) row_[k] = gram(graph, train_[k]);
    if (models_.size() == 1) {
      return svm_predict(models_[0], row_) == 1 ? classes_.back() : classes_.front();
    }
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < models_.size(); ++p) {
      const double value = svm_decision(models_[p], row_);
      if (value > best_value) {
        best_value = value;
        best = p;
      }
    }
    return classes_[best];
  }

 private:
  std::vector<int> classes_;
  std::vector<int> train_;
  std::vector<SvmModel> models_;
  mutable std::vector<double> row_;
};

double accuracy(const MatrixXd& gram, const std::vector<int>& labels,
                const std::vector<int>& train, const std::vector<int>& test,
                double C) {
  if (test.empty()) return 0.0;
  const Classifier clf(gram, labels, train, C);
  int correct = 0;
  for (int idx : test) correct += clf.predict(gram, idx) == labels[idx];
  return 100.0 * correct / static_cast<double>(test.size());
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

std::vector<int> stratified_folds(const GraphDataset& ds, int folds,
                                  std::uint64_t seed) {
  ds.validate();
  if (folds < 2) throw ContractViolation("stratified_folds: folds must be >= 2");
  if (static_cast<int>(ds.size()) < folds) {
    throw ContractViolation("stratified_folds: " + std::to_string(ds.size()) +
                            " graphs but " + std::to_string(folds) + " folds");
  }
  const auto rank = canonical_ranks(ds);
  std::vector<int> items(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) items[rank[i]] = static_cast<int>(i);
  const auto fold_of_rank = stratify(items, ds.class_labels, folds, seed);
  std::vector<int> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = fold_of_rank[rank[i]];
  return out;
}

CvReport cross_validate(const GraphDataset& ds,
                        std::span<const KernelCandidate> candidates,
                        const CvOptions& options) {
  ds.validate();
  if (candidates.empty()) throw ContractViolation("cross_validate: no kernels");
  if (options.c_grid.empty()) throw ContractViolation("cross_validate: empty C grid");
  if (options.repeats < 1 || options.inner_folds < 2) {
    throw ContractViolation("cross_validate: repeats >= 1 and inner_folds >= 2");
  }
  if (static_cast<int>(ds.size()) < options.folds || options.folds < 2) {
    throw ContractViolation("cross_validate: " + std::to_string(ds.size()) +
                            " graphs cannot fill " + std::to_string(options.folds) +
                            " folds");
  }
  if (ds.distinct_labels().size() < 2) {
    throw ContractViolation("cross_validate: need at least two classes");
  }
  const auto n = static_cast<Eigen::Index>(ds.size());
  for (const auto& cand : candidates) {
    if (cand.gram.rows() != n || cand.gram.cols() != n) {
      throw ContractViolation("cross_validate: Gram size does not match dataset");
    }
    const double scale = std::max(1.0, cand.gram.cwiseAbs().maxCoeff());
    if (!is_symmetric(cand.gram) || min_eigenvalue(cand.gram) < -1e-8 * scale) {
      throw ContractViolation(
          "cross_validate: kernel is not PSD; apply repair_indefinite first");
    }
  }

  const auto rank = canonical_ranks(ds);
  std::vector<int> canonical(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) canonical[rank[i]] = static_cast<int>(i);
  const std::vector<int>& labels = ds.class_labels;

  const std::size_t tasks = static_cast<std::size_t>(options.repeats) * options.folds;
  std::vector<FoldResult> results(tasks);
  std::vector<std::vector<int>> fold_of(options.repeats);
  for (int r = 0; r < options.repeats; ++r) {
    fold_of[r] = stratify(canonical, labels, options.folds,
                          mix_seed(options.seed, static_cast<std::uint64_t>(r), 0));
  }

  parallel_for(tasks, options.threads, [&](std::size_t task) {
    const int r = static_cast<int>(task / options.folds);
    const int f = static_cast<int>(task % options.folds);
    std::vector<int> train;
    std::vector<int> test;
    for (std::size_t k = 0; k < canonical.size(); ++k) {
      (fold_of[r][k] == f ? test : train).push_back(canonical[k]);
    }

    const auto inner_fold = stratify(
        train, labels, options.inner_folds,
        mix_seed(options.seed, static_cast<std::uint64_t>(r),
                 static_cast<std::uint64_t>(f) + 1));
    std::size_t best_candidate = 0;
    double best_C = options.c_grid.front();
    double best_score = -1.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      for (double C : options.c_grid) {
        double score = 0.0;
        for (int g = 0; g < options.inner_folds; ++g) {
          std::vector<int> inner_train;
          std::vector<int> inner_test;
          for (std::size_t k = 0; k < train.size(); ++k) {
            (inner_fold[k] == g ? inner_test : inner_train).push_back(train[k]);
          }
          score += accuracy(candidates[c].gram, labels, inner_train, inner_test, C);
        }
        if (score > best_score) {
          best_score = score;
          best_candidate = c;
          best_C = C;
        }
      }
    }
    FoldResult& out = results[task];
    out.repeat = r;
    out.fold = f;
    out.candidate = best_candidate;
    out.C = best_C;
    out.accuracy = accuracy(candidates[best_candidate].gram, labels, train, test, best_C);
  });

  CvReport report;
  report.per_fold = results;
  std::vector<double> all;
  for (const auto& fr : results) all.push_back(fr.accuracy);
  for (int r = 0; r < options.repeats; ++r) {
    report.repeat_means.push_back(mean(std::vector<double>(
        all.begin() + static_cast<std::ptrdiff_t>(r) * options.folds,
        all.begin() + static_cast<std::ptrdiff_t>(r + 1) * options.folds)));
  }
  report.mean_accuracy = mean(all);
  report.std_accuracy = stddev(report.repeat_means);
  report.std_fold_accuracy = stddev(all);

  std::map<std::pair<std::size_t, double>, int> votes;
  for (const auto& fr : results) ++votes[{fr.candidate, fr.C}];
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  for (const auto& [k, v] : candidates[best->first.first].parameters) {
    report.best_hyperparameters[k] = v;
  }
  report.best_hyperparameters["C"] = format_double(best->first.second);
  return report;
}

}  // namespace otgk
