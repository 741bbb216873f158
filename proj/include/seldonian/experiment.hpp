#pragma once
// Multi-trial experiment runner, configuration and oracle cross-checks.
//
// Every trial draws a fresh dataset from its own stream,
// derive_seed(derive_seed(seed, m), trial), so results do not depend on the
// number of worker threads or on which other trials run. Trial rows are
// ordered by (m, trial, algorithm); summaries are a fold over those rows.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seldonian/dataset.hpp"
#include "seldonian/optimizer.hpp"
#include "seldonian/rl.hpp"

namespace seldonian {

enum class ExperimentKind { regression_sweep, lambda_sweep, rl_sweep, oracle_check };
enum class Algorithm { ls, sclr, ndlr, qndlr, qndlr_lambda, alg11 };

std::string to_string(ExperimentKind kind);
std::string to_string(Algorithm algo);
// Throw std::invalid_argument on unknown names.
ExperimentKind parse_kind(std::string_view name);
Algorithm parse_algorithm(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::regression_sweep;
  std::vector<Algorithm> algorithms{Algorithm::ls};
  std::vector<std::size_t> m_values{1000};
  std::size_t trials = 500;
  double delta = 0.05;
  double epsilon = 0.1;
  // Used by sclr and qndlr-lambda.
  double lambda = 4.9;
  // Lambda grid of the lambda sweep.
  std::vector<double> lambdas{2.45, 4.9, 9.8};
  // Range b handed to the Hoeffding bounds of ndlr.
  double range = 6.0;
  // Barrier scale of the t-test objective; 0 selects 3 * max |y| of D1.
  double barrier_range = 0.0;
  std::uint64_t seed = 0;
  // Trial rows go here and the summary to <stem>.summary.csv beside it.
  std::filesystem::path out;
  std::size_t threads = 1;
  // Off by default so reruns are byte-identical; wall_ms is then 0.
  bool record_wall_time = false;
  SearchConfig search;
  ToyEnvironmentParams environment;

  // Throws std::invalid_argument when the config cannot run.
  void validate() const;
};

// JSON keys mirror the field names; "algorithms" takes CLI names
// ("ls", "qndlr-lambda", ...), "kind" takes "regression-sweep" etc.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct TrialRecord {
  std::size_t trial = 0;
  std::size_t m = 0;
  std::string algo;
  bool found = false;
  Weights theta;
  std::optional<std::size_t> index;
  // Regression: on the training data / from the analytic oracle.
  std::optional<double> sample_d;
  std::optional<double> safety_bound;
  std::optional<double> true_d;
  std::optional<double> true_mse;
  // RL: true expected returns of the returned distribution and the behavior.
  std::optional<double> true_r;
  std::optional<double> true_r1;
  std::optional<double> behavior_r1;
  bool violation = false;
  double wall_ms = 0.0;
};

struct SummaryRow {
  std::string algo;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t solutions = 0;
  std::size_t violations = 0;
  double solution_rate = 0.0;
  // Violations over all trials, and over trials that returned a solution.
  double violation_rate = 0.0;
  double violation_rate_returned = 0.0;
  // Means over returned solutions (NaN when there are none).
  double mean_true_mse = 0.0;
  double mean_true_abs_d = 0.0;
  double mean_true_d = 0.0;
  double mean_true_r = 0.0;
  double mean_true_r1 = 0.0;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::regression_sweep;
  std::vector<TrialRecord> trials;
  std::vector<SummaryRow> summary;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Opens the output files first (failing before any computation), runs,
// then writes both CSVs.
ExperimentResult run_experiment_to_files(const ExperimentConfig& cfg);

std::filesystem::path summary_path(const std::filesystem::path& trials_path);

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& trials);

void write_trials_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);

struct OracleCheck {
  std::string name;
  double measured = 0.0;
  std::string requirement;
  bool pass = false;
};

// Analytic-versus-Monte-Carlo cross-checks; failures are entries, not throws.
std::vector<OracleCheck> oracle_check(std::uint64_t seed = 0);

}  // namespace seldonian
