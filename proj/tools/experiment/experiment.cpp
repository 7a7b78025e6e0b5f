#include "experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "otgk/error.hpp"
#include "otgk/gram_io.hpp"
#include "otgk/tu_format.hpp"

namespace otgk::experiment {
namespace {

namespace fs = std::filesystem;
using Params = std::vector<std::pair<std::string, std::string>>;

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr char kCacheFormat[] = "otgk-gram-cache-1";

void fnv(std::uint64_t& h, const std::string& s) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= kFnvPrime;
  }
  h ^= 0xff;  // field separator
  h *= kFnvPrime;
}

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

std::string hex(std::uint64_t x) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(x));
  return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// A group of candidates sharing one OT computation.
struct Group {
  int levels = 0;
  std::vector<std::size_t> members;  // candidate indices
};

struct Candidate {
  Params params;
  BaseKernelSpec spec;
  int levels = 0;
  double rgot_lambda = 0.0;
};

std::vector<Candidate> candidates(const ExperimentConfig& cfg) {
  std::vector<Candidate> out;
  const BaseKernelKind kind = parse_base_kernel(cfg.base_kernel);
  for (int levels : cfg.levels) {
    if (cfg.method == "rg_ot") {
      for (double lambda : cfg.rgot_lambdas) {
        Candidate c;
        c.levels = levels;
        c.rgot_lambda = lambda;
        c.params = {{"method", "rg_ot"},
                    {"embed_dim", std::to_string(cfg.embed_dim)},
                    {"levels", std::to_string(levels)},
                    {"sinkhorn_lambda", format_double(lambda)},
                    {"C", format_double(cfg.rgot_C)},
                    {"max_iter", std::to_string(cfg.rgot_max_iter)},
                    {"sinkhorn_max_iter", std::to_string(cfg.rgot_sinkhorn_iter)}};
        out.push_back(std::move(c));
      }
      continue;
    }
    for (double bandwidth : cfg.bandwidths) {
      Candidate c;
      c.levels = levels;
      c.spec = {kind, bandwidth};
      if (cfg.method == "pg_ot") {
        c.params = {{"method", "pg_ot"},
                    {"levels", std::to_string(levels)},
                    {"embed_dim", std::to_string(cfg.embed_dim)}};
      } else {
        const bool pyramid = cfg.sg_variant == "pyramid";
        c.params = {{"method", pyramid ? "sg_ot_pyramid" : "sg_ot_eigen"},
                    {"radius", std::to_string(cfg.radius)},
                    {"embed_dim", std::to_string(cfg.embed_dim)}};
        if (pyramid) c.params.emplace_back("levels", std::to_string(levels));
        c.params.emplace_back("normalize", cfg.sg_normalize ? "true" : "false");
      }
      c.params.emplace_back("base_kernel", to_string(kind));
      c.params.emplace_back("bandwidth", format_double(bandwidth));
      out.push_back(std::move(c));
    }
    // Only the pyramid-based kernels depend on the level count.
    if (cfg.method == "sg_ot" && cfg.sg_variant == "eigen") break;
  }
  return out;
}

std::vector<GramMatrix> compute_group(const GraphDataset& ds,
                                      const ExperimentConfig& cfg,
                                      const std::vector<Candidate>& all,
                                      const std::vector<std::size_t>& members) {
  std::vector<GramMatrix> out;
  const int levels = all[members.front()].levels;
  if (cfg.method == "rg_ot") {
    const GraphVectorSet gvecs = gvec_representation(ds, cfg.embed_dim, levels);
    for (std::size_t idx : members) {
      RgotConfig rc;
      rc.sinkhorn_lambda = all[idx].rgot_lambda;
      rc.C = cfg.rgot_C;
      rc.max_iter = cfg.rgot_max_iter;
      rc.sinkhorn_max_iter = cfg.rgot_sinkhorn_iter;
      rc.threads = cfg.threads;
      out.push_back(learn_rg_ot(gvecs, rc));
    }
    return out;
  }
  std::vector<BaseKernelSpec> specs;
  for (std::size_t idx : members) specs.push_back(all[idx].spec);
  if (cfg.method == "pg_ot") {
    PgOtOptions o;
    o.levels = levels;
    o.embed_dim = cfg.embed_dim;
    o.threads = cfg.threads;
    return pg_ot_grams(ds, o, specs);
  }
  SgOtOptions o;
  o.radius = cfg.radius;
  o.embed_dim = cfg.embed_dim;
  o.variant = cfg.sg_variant == "pyramid" ? SubgraphEmbedding::kPyramid
                                          : SubgraphEmbedding::kEigen;
  o.levels = levels;
  o.normalize = cfg.sg_normalize;
  o.threads = cfg.threads;
  return sg_ot_grams(ds, o, specs);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (dataset_dir.empty()) fail("--dataset is required");
  if (method != "pg_ot" && method != "sg_ot" && method != "rg_ot") {
    fail("--method must be pg_ot, sg_ot or rg_ot (got '" + method + "')");
  }
  if (sg_variant != "eigen" && sg_variant != "pyramid") {
    fail("--sg-variant must be eigen or pyramid (got '" + sg_variant + "')");
  }
  if (embed_dim < 1) fail("--embed-dim must be >= 1");
  if (levels.empty()) fail("--levels needs at least one value");
  for (int l : levels) {
    if (l < 1 || l > 30) fail("--levels values must lie in [1, 30]");
  }
  if (radius < 0) fail("--radius must be >= 0");
  try {
    const BaseKernelKind kind = parse_base_kernel(base_kernel);
    parse_repair_method(repair);
    if (method != "rg_ot") {
      if (bandwidths.empty()) fail("--bandwidth needs at least one value");
      for (double b : bandwidths) BaseKernelSpec{kind, b}.validate();
    }
  } catch (const otgk::Error& e) {
    fail(e.what());
  }
  if (method == "rg_ot") {
    if (rgot_lambdas.empty()) fail("--rgot-lambda needs at least one value");
    for (double l : rgot_lambdas) {
      if (!(l > 0.0)) fail("--rgot-lambda values must be positive");
    }
    if (!(rgot_C > 0.0)) fail("--rgot-C must be positive");
    if (rgot_max_iter < 1 || rgot_sinkhorn_iter < 1) {
      fail("--rgot-max-iter and --rgot-sinkhorn-iter must be >= 1");
    }
  }
  if (svm_c.empty()) fail("--svm-c needs at least one value");
  for (double c : svm_c) {
    if (!(c > 0.0)) fail("--svm-c values must be positive");
  }
  if (folds < 2) fail("--folds must be >= 2");
  if (repeats < 1) fail("--repeats must be >= 1");
  if (inner_folds < 2) fail("--inner-folds must be >= 2");
}

std::string ExperimentConfig::label() const {
  if (method == "sg_ot" && sg_variant == "pyramid") return "sg_ot_pyramid";
  return method;
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["dataset"] = dataset_dir.string();
  j["dataset_name"] = dataset_name;
  j["method"] = method;
  j["sg_variant"] = sg_variant;
  j["embed_dim"] = embed_dim;
  j["levels"] = levels;
  j["radius"] = radius;
  j["sg_normalize"] = sg_normalize;
  j["base_kernel"] = base_kernel;
  j["bandwidth"] = bandwidths;
  j["rgot_lambda"] = rgot_lambdas;
  j["rgot_C"] = rgot_C;
  j["rgot_max_iter"] = rgot_max_iter;
  j["rgot_sinkhorn_iter"] = rgot_sinkhorn_iter;
  j["repair"] = repair;
  j["svm_c"] = svm_c;
  j["folds"] = folds;
  j["repeats"] = repeats;
  j["inner_folds"] = inner_folds;
  j["seed"] = seed;
  j["output"] = output.string();
  j["cache_dir"] = cache_dir.string();
  j["threads"] = threads;
  return j;
}

GraphDataset load_dataset(const ExperimentConfig& cfg) {
  if (!fs::is_directory(cfg.dataset_dir)) {
    throw ConfigError("dataset directory not found: " + cfg.dataset_dir.string());
  }
  std::string name = cfg.dataset_name;
  if (name.empty()) name = fs::absolute(cfg.dataset_dir).lexically_normal().filename().string();
  if (name.empty()) {
    name = fs::absolute(cfg.dataset_dir).lexically_normal().parent_path().filename().string();
  }
  try {
    return parse_tu_dataset(cfg.dataset_dir, name);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t cache_key(const GraphDataset& ds, const Params& params) {
  std::uint64_t h = kFnvOffset;
  fnv(h, kCacheFormat);
  fnv(h, hex(ds.content_hash()));
  for (const auto& [k, v] : params) {
    fnv(h, k);
    fnv(h, v);
  }
  return h;
}

GramRun compute_grams(const GraphDataset& ds, const ExperimentConfig& cfg,
                      const Logger& log) {
  const std::vector<Candidate> all = candidates(cfg);
  GramRun run;
  run.grams.resize(all.size());
  run.from_cache.assign(all.size(), false);

  std::vector<fs::path> files(all.size());
  std::vector<std::uint64_t> keys(all.size());
  std::map<int, std::vector<std::size_t>> missing;  // by level count
  for (std::size_t i = 0; i < all.size(); ++i) {
    keys[i] = cache_key(ds, all[i].params);
    if (!cfg.cache_dir.empty()) {
      files[i] = cfg.cache_dir / (hex(keys[i]) + ".gram");
      if (auto cached = read_gram_binary(files[i], keys[i])) {
        run.grams[i] = std::move(*cached);
        run.from_cache[i] = true;
        log("cache hit: " + files[i].string());
        continue;
      }
    }
    missing[all[i].levels].push_back(i);
  }

  for (const auto& [levels, members] : missing) {
    std::vector<GramMatrix> grams = compute_group(ds, cfg, all, members);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const std::size_t i = members[k];
      run.grams[i] = std::move(grams[k]);
      run.grams[i].parameters = all[i].params;
      if (!cfg.cache_dir.empty()) {
        fs::create_directories(cfg.cache_dir);
        write_gram_binary(run.grams[i], keys[i], files[i]);
        log("cache store: " + files[i].string());
      }
    }
  }
  return run;
}

ClassifyResult run_classify(const GraphDataset& ds, const ExperimentConfig& cfg,
                            const Logger& log) {
  ClassifyResult result;
  auto start = std::chrono::steady_clock::now();
  GramRun run = compute_grams(ds, cfg, log);
  result.gram_seconds = seconds_since(start);

  const RepairMethod repair = parse_repair_method(cfg.repair);
  std::vector<KernelCandidate> cands;
  for (auto& gram : run.grams) {
    const PsdCheck psd = check_psd(gram);
    result.raw_min_eigenvalues.push_back(psd.min_eigenvalue);
    std::string line = "min eigenvalue " + format_double(psd.min_eigenvalue) +
                       (psd.is_psd ? " (psd)" : " (indefinite)");
    GramMatrix used = gram;
    if (psd.min_eigenvalue < 0.0) {
      if (repair == RepairMethod::kNone && !psd.is_psd) {
        throw ContractViolation(
            "Gram matrix is indefinite (min eigenvalue " +
            format_double(psd.min_eigenvalue) + "); choose a --repair method");
      }
      if (repair != RepairMethod::kNone) {
        used = repair_indefinite(gram, repair);
        line += ", repaired by " + to_string(repair);
      }
    }
    std::string tag;
    for (const auto& [k, v] : gram.parameters) {
      if (k == "bandwidth" || k == "levels" || k == "sinkhorn_lambda") {
        tag += k + "=" + v + " ";
      }
    }
    log(tag + line);
    cands.push_back({used.parameters, used.entries});
    result.grams.push_back(std::move(used));
  }

  CvOptions cv;
  cv.folds = cfg.folds;
  cv.repeats = cfg.repeats;
  cv.inner_folds = cfg.inner_folds;
  cv.c_grid = cfg.svm_c;
  cv.seed = cfg.seed;
  cv.threads = cfg.threads;
  start = std::chrono::steady_clock::now();
  result.report = cross_validate(ds, cands, cv);
  result.cv_seconds = seconds_since(start);
  return result;
}

nlohmann::ordered_json report_json(const GraphDataset& ds,
                                   const ExperimentConfig& cfg,
                                   const ClassifyResult& result) {
  nlohmann::ordered_json j;
  j["config"] = cfg.to_json();
  j["dataset"] = {{"name", ds.name},
                  {"graphs", ds.size()},
                  {"classes", ds.distinct_labels()},
                  {"content_hash", hex(ds.content_hash())}};
  j["repair"] = cfg.repair;
  nlohmann::ordered_json kernels = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.grams.size(); ++i) {
    nlohmann::ordered_json k;
    for (const auto& [key, value] : result.grams[i].parameters) k[key] = value;
    k["min_eigenvalue"] = result.raw_min_eigenvalues[i];
    k["repaired"] = to_string(result.grams[i].repaired);
    kernels.push_back(k);
  }
  j["kernels"] = kernels;

  const CvReport& r = result.report;
  nlohmann::ordered_json res;
  res["mean_accuracy"] = r.mean_accuracy;
  res["std_accuracy"] = r.std_accuracy;
  res["std_fold_accuracy"] = r.std_fold_accuracy;
  res["summary"] = format_mean_std(r.mean_accuracy, r.std_accuracy);
  res["repeat_means"] = r.repeat_means;
  res["best_hyperparameters"] = r.best_hyperparameters;
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const auto& f : r.per_fold) {
    folds.push_back({{"repeat", f.repeat},
                     {"fold", f.fold},
                     {"accuracy", f.accuracy},
                     {"kernel", f.candidate},
                     {"C", f.C}});
  }
  res["per_fold"] = folds;
  j["result"] = res;
  j["timings_seconds"] = {{"load", result.load_seconds},
                          {"gram", result.gram_seconds},
                          {"cross_validation", result.cv_seconds}};
  return j;
}

std::string format_mean_std(double mean, double std) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.2f±%.2f", mean, std);
  return buffer;
}

std::vector<BenchRow> run_bench(const std::vector<ExperimentConfig>& runs,
                                const Logger& log) {
  if (runs.empty()) throw ConfigError("bench needs at least one run");
  std::vector<BenchRow> rows;
  for (const auto& cfg : runs) {
    BenchRow row;
    row.method = cfg.label();
    row.dataset = cfg.dataset_name.empty()
                      ? cfg.dataset_dir.filename().string()
                      : cfg.dataset_name;
    try {
      cfg.validate();
      const GraphDataset ds = load_dataset(cfg);
      row.dataset = ds.name;
      log("bench: " + row.method + " on " + ds.name);
      const ClassifyResult result = run_classify(ds, cfg, log);
      row.accuracy = format_mean_std(result.report.mean_accuracy,
                                     result.report.std_accuracy);
      row.status = "ok";
    } catch (const std::exception& e) {
      row.accuracy = "";
      row.status = std::string("failed: ") + e.what();
      log("bench: " + row.method + " failed: " + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "method,dataset,accuracy,status\n";
  for (const auto& r : rows) {
    out += csv_field(r.method) + "," + csv_field(r.dataset) + "," +
           csv_field(r.accuracy) + "," + csv_field(r.status) + "\n";
  }
  return out;
}

}  // namespace otgk::experiment
