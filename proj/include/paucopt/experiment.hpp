// Experiment harness: flat sectioned config files, per-seed runs with trace
// CSV / metrics JSON / ROC CSV outputs, and multi-solver comparisons.
#pragma once

#include "paucopt/baselines.hpp"
#include "paucopt/dataset.hpp"

#include <optional>
#include <string>
#include <vector>

namespace paucopt {

enum class Task { PAuc, Sorr };
enum class SolverKind { AgdSbcd, Dca, ProxDca };
enum class DataKind { Synthetic, SyntheticRegression, Libsvm };

struct ExperimentConfig {
  Task task = Task::PAuc;
  SolverKind solver = SolverKind::AgdSbcd;

  DataKind data_kind = DataKind::Synthetic;
  SyntheticSpec synthetic;
  SyntheticRegressionSpec synthetic_regression;
  std::string libsvm_path;
  int positive_label = 1;

  // Exactly one of (alpha, beta) / (m, n) is set.
  std::optional<std::pair<double, double>> rates;
  std::optional<std::pair<Index, Index>> ranks;

  AgdConfig agd;
  DcaConfig dca;

  std::vector<std::uint64_t> seeds{0};
  double max_epochs = std::numeric_limits<double>::infinity();
  std::string out_dir = "paucopt_out";
};

// Flat `key = value` format with [section] headers and '#' comments.
// Unknown keys or sections are rejected.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

const char* solver_name(SolverKind kind);

// Runs every seed; writes trace_seed<S>.csv and (for the pairwise task)
// roc_seed<S>.csv per seed plus one metrics.json. Throws on error.
void run_experiment(const ExperimentConfig& cfg);

// Runs all configs (same dataset and range required), writes a merged
// long-format CSV keyed by (solver, seed, k) and prints a summary table.
void compare(const std::vector<ExperimentConfig>& cfgs, const std::string& out_dir);

struct CliOverrides {
  std::optional<std::string> out_dir;
  std::vector<std::uint64_t> seeds;  // replaces the config list when nonempty
  std::optional<double> max_epochs;
};

// Exception-to-exit-code wrappers used by the command line tool:
// 0 success, 2 config error, 3 data error, 4 solver divergence.
int run_experiment_cli(const std::string& config_path, const CliOverrides& overrides);
int compare_cli(const std::vector<std::string>& config_paths, const CliOverrides& overrides);

}  // namespace paucopt
