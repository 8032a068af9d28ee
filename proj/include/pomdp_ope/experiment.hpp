#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pomdp_ope/dataset.hpp"
#include "pomdp_ope/diagnostics.hpp"
#include "pomdp_ope/estimators.hpp"
#include "pomdp_ope/scenarios.hpp"

namespace pomdp_ope {

/// One estimator entry in an experiment config.
struct EstimatorSpec {
  std::string name;  // minimax_linear | minimax_rkhs | finite_horizon | sis
  EstimatorConfig cfg;
  int horizon = 5;          // finite_horizon
  int horizon_cap = 100;    // sis truncation
  std::string features = "one-hot";  // one-hot | current-obs (instrument side)
};

struct ExperimentConfig {
  int spec_version = 1;
  std::string scenario;  // bundled scenario name; empty means explicit model
  std::uint64_t scenario_seed = 1;
  std::optional<TabularPOMDP> model;
  std::optional<MemoryPolicy> policy_b;
  std::optional<MemoryPolicy> policy_e;
  WindowConfig windows;
  std::vector<EstimatorSpec> estimators;
  std::vector<std::int64_t> n_grid;
  std::int64_t n_init = 1000;
  std::vector<std::uint64_t> seeds;
  DatasetMode mode = DatasetMode::IidPerTuple;
  std::string output_dir = "out";
  int jobs = 1;

  void validate() const;
  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig load_file(const std::string& path);
};

struct ResultRow {
  std::string estimator;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  double j_hat = 0.0;
  double j_true = 0.0;
  double abs_error = 0.0;
  double runtime_ms = 0.0;
  std::string diag_hash;
  bool failed = false;
  std::string error;
};

struct SlopeFit {
  std::string estimator;
  double slope = 0.0;
  bool valid = false;
};

struct RunOutputs {
  std::vector<ResultRow> rows;
  ConditionReport report;
  double j_true = 0.0;
  std::vector<SlopeFit> slopes;
};

/// Runs the estimator x n x seed grid; per-cell failures are recorded
/// in the row and the run continues.
RunOutputs run_experiment(const ExperimentConfig& config);

/// run_experiment plus results.csv / results.jsonl / report.md in
/// config.output_dir. results.csv carries no wall-clock column so that
/// reruns are byte-identical; runtimes live in results.jsonl.
void run_to_files(const ExperimentConfig& config);

/// Least-squares slope of mean log10 |error| against log10 n.
SlopeFit fit_error_slope(const std::vector<ResultRow>& rows, const std::string& estimator);

std::string fnv1a_hex(const std::string& text);

}  // namespace pomdp_ope
