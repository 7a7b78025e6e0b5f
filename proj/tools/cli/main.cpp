// otgk: compute OT graph kernels and evaluate them with repeated SVM CV.
//
//   otgk gram     --dataset data/MUTAG --method pg_ot --output mutag_pg.csv
//   otgk classify --dataset data/MUTAG --method sg_ot --output mutag_sg
//   otgk bench    --dataset data/MUTAG --run "--method pg_ot" --run "--method sg_ot"
//
// Every flag can also come from --config FILE (one key=value per line, keys
// are the long flag names). Flags given on the command line win.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "otgk/error.hpp"
#include "otgk/gram_io.hpp"

namespace {

namespace fs = std::filesystem;
using otgk::experiment::ConfigError;
using otgk::experiment::ExperimentConfig;

constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

void add_experiment_options(CLI::App& app, ExperimentConfig& cfg) {
  app.add_option("--dataset,--dataset_dir", cfg.dataset_dir,
                 "Directory holding the TU-format files");
  app.add_option("--dataset-name,--dataset_name", cfg.dataset_name,
                 "File prefix (default: directory name)");
  app.add_option("--method", cfg.method, "pg_ot | sg_ot | rg_ot")->capture_default_str();
  app.add_option("--sg-variant,--sg_variant", cfg.sg_variant,
                 "Subgraph embedding for sg_ot: eigen | pyramid")
      ->capture_default_str();
  app.add_option("--embed-dim,--embed_dim", cfg.embed_dim, "Eigenvectors per node")
      ->capture_default_str();
  app.add_option("--levels", cfg.levels, "Pyramid levels (grid)")->capture_default_str();
  app.add_option("--radius", cfg.radius, "Subgraph radius in hops")->capture_default_str();
  app.add_option("--sg-normalize,--sg_normalize", cfg.sg_normalize,
                 "Average (true) or sum (false) over subgraph pairs")
      ->capture_default_str();
  app.add_option("--base-kernel,--base_kernel", cfg.base_kernel,
                 "laplacian | gaussian | linear")
      ->capture_default_str();
  app.add_option("--bandwidth", cfg.bandwidths, "Base kernel bandwidths (grid)")
      ->capture_default_str();
  app.add_option("--rgot-lambda,--rgot_lambda", cfg.rgot_lambdas,
                 "RG-OT Sinkhorn coefficients (grid)")
      ->capture_default_str();
  app.add_option("--rgot-C,--rgot_C", cfg.rgot_C, "RG-OT regularization weight")
      ->capture_default_str();
  app.add_option("--rgot-max-iter,--rgot_max_iter", cfg.rgot_max_iter,
                 "RG-OT outer iterations")
      ->capture_default_str();
  app.add_option("--rgot-sinkhorn-iter,--rgot_sinkhorn_iter", cfg.rgot_sinkhorn_iter,
                 "Sinkhorn rounds per pair")
      ->capture_default_str();
  app.add_option("--repair", cfg.repair, "none | clip | flip | shift")
      ->capture_default_str();
  app.add_option("--svm-c,--svm_c", cfg.svm_c, "SVM C grid")->capture_default_str();
  app.add_option("--folds", cfg.folds)->capture_default_str();
  app.add_option("--repeats", cfg.repeats)->capture_default_str();
  app.add_option("--inner-folds,--inner_folds", cfg.inner_folds)->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--output,-o", cfg.output, "Output file (or report prefix)");
  app.add_option("--cache-dir,--cache_dir", cfg.cache_dir,
                 "Gram cache directory; empty disables")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads, 0 = all cores")
      ->capture_default_str();
}

void log_line(const std::string& msg) { std::cerr << "[otgk] " << msg << '\n'; }

std::string stem_for(const ExperimentConfig& cfg, const std::string& suffix) {
  const std::string name = cfg.dataset_name.empty()
                               ? cfg.dataset_dir.filename().string()
                               : cfg.dataset_name;
  return name + "_" + cfg.label() + suffix;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw otgk::Error("cannot write " + path.string());
}

int cmd_gram(const ExperimentConfig& cfg) {
  const otgk::GraphDataset ds = otgk::experiment::load_dataset(cfg);
  log_line("loaded " + ds.name + ": " + std::to_string(ds.size()) + " graphs");
  auto run = otgk::experiment::compute_grams(ds, cfg, log_line);

  fs::path out = cfg.output.empty() ? fs::path(stem_for(cfg, "_gram.csv")) : cfg.output;
  if (!out.has_extension()) out += ".csv";
  for (std::size_t i = 0; i < run.grams.size(); ++i) {
    auto& gram = run.grams[i];
    const otgk::PsdCheck psd = otgk::check_psd(gram);
    std::cerr << "[otgk] PSD check: min eigenvalue " << psd.min_eigenvalue
              << (psd.is_psd ? " (positive semidefinite)" : " (indefinite)") << '\n';
    fs::path path = out;
    if (run.grams.size() > 1) {
      path.replace_filename(out.stem().string() + "." + std::to_string(i) +
                            out.extension().string());
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    otgk::write_gram_csv(gram, path);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int cmd_classify(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const otgk::GraphDataset ds = otgk::experiment::load_dataset(cfg);
  log_line("loaded " + ds.name + ": " + std::to_string(ds.size()) + " graphs");
  auto result = otgk::experiment::run_classify(ds, cfg, log_line);
  result.load_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() -
      result.gram_seconds - result.cv_seconds;

  fs::path prefix = cfg.output.empty() ? fs::path(stem_for(cfg, "")) : cfg.output;
  if (prefix.extension() == ".json" || prefix.extension() == ".csv") {
    prefix.replace_extension();
  }
  const fs::path json_path = prefix.string() + ".json";
  const fs::path csv_path = prefix.string() + ".csv";
  write_text(json_path, otgk::experiment::report_json(ds, cfg, result).dump(2) + "\n");
  otgk::experiment::BenchRow row{cfg.label(), ds.name,
                                 otgk::experiment::format_mean_std(
                                     result.report.mean_accuracy,
                                     result.report.std_accuracy),
                                 "ok"};
  write_text(csv_path, otgk::experiment::bench_csv({row}));
  std::cout << cfg.label() << " " << ds.name << " " << row.accuracy << '\n';
  log_line("wrote " + json_path.string() + " and " + csv_path.string());
  return 0;
}

std::vector<std::string> read_runs_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("runs file not found: " + path.string());
  std::vector<std::string> runs;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    runs.push_back(line);
  }
  return runs;
}

int cmd_bench(const ExperimentConfig& base, const std::vector<std::string>& runs) {
  std::vector<ExperimentConfig> configs;
  for (const auto& text : runs) {
    ExperimentConfig cfg = base;
    CLI::App sub("bench run");
    add_experiment_options(sub, cfg);
    try {
      sub.parse(text, false);
    } catch (const CLI::ParseError& e) {
      throw ConfigError("bad --run '" + text + "': " + e.what());
    }
    configs.push_back(cfg);
  }
  const auto rows = otgk::experiment::run_bench(configs, log_line);
  const std::string csv = otgk::experiment::bench_csv(rows);
  if (base.output.empty()) {
    std::cout << csv;
  } else {
    write_text(base.output, csv);
    log_line("wrote " + base.output.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Optimal transport graph kernels");
  app.set_config("--config", "", "Flat key=value file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  ExperimentConfig cfg;
  add_experiment_options(app, cfg);
  app.get_option("--dataset")->required();

  auto* gram = app.add_subcommand("gram", "Compute and store Gram matrices");
  auto* classify = app.add_subcommand("classify", "Repeated nested CV with an SVM");
  auto* bench = app.add_subcommand("bench", "Accuracy table over several runs");
  std::vector<std::string> runs;
  fs::path runs_file;
  bench->add_option("--run", runs, "Flag overrides for one run (repeatable)");
  bench->add_option("--runs-file", runs_file, "One run per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n"
              << app.get_formatter()->make_help(&app, "", CLI::AppFormatMode::Normal);
    return kExitUsage;
  }

  try {
    if (bench->parsed()) {
      if (!runs_file.empty()) {
        const auto extra = read_runs_file(runs_file);
        runs.insert(runs.end(), extra.begin(), extra.end());
      }
      if (runs.empty()) throw ConfigError("bench needs at least one --run or --runs-file entry");
      return cmd_bench(cfg, runs);
    }
    cfg.validate();
    if (gram->parsed()) return cmd_gram(cfg);
    if (classify->parsed()) return cmd_classify(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const otgk::ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitUsage;
}
