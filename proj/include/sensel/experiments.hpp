#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sensel/strategies.hpp"

namespace sensel {

/// Monte-Carlo experiment description. Defaults reproduce the reference
/// setup: 100 measurements, 40 parameters, budget 40, 5 shared vectors,
/// correlation strength 0.1 over 15 cross-node row pairs (30 modified rows).
struct ExperimentConfig {
  int m = 100;
  int n = 40;
  int k_s = 40;
  int n_shared = 5;  // JSON key "N"
  double sigma_corr = 0.1;
  int num_correlated_pairs = 15;
  int trials = 10000;
  std::uint64_t master_seed = 1;
  std::vector<Strategy> strategies = {Strategy::Centralized, Strategy::NaiveDecentralized,
                                      Strategy::FocusedDiversity, Strategy::LinearPenalty};
  std::vector<int> n_sweep;  // optional sweep values for sweep runs
  SolverParams solver;
  double trial_seconds_budget = 60.0;

  void validate() const;

  /// Strict parse: unknown keys are rejected. Accepted keys are the config
  /// fields (snake_case, with "N" for the shared-vector count) plus an
  /// optional "solver" object with the SolverParams fields. Keys present in
  /// the JSON overwrite the base config.
  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig from_json_string(const std::string& text, ExperimentConfig base);
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_file(const std::string& path, ExperimentConfig base);

  /// Effective config (defaults filled in), for the CLI's stderr echo.
  std::string to_json_string() const;
};

/// Draw one correlated instance: iid standard normal halves, then
/// num_correlated_pairs distinct (row of A1, row of A2) pairs rewritten as
/// sqrt(1-sigma^2) b + sigma w with a shared b per pair. Deterministic
/// given the seed. correlated_pairs, when non-null, receives the modified
/// (i, j) row indices.
Partition generate_instance(const ExperimentConfig& cfg, std::uint64_t seed,
                            std::vector<std::pair<int, int>>* correlated_pairs = nullptr);

/// Per-trial stream seed; trials are independent of execution order.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

struct TrialRecord {
  int trial = 0;
  Strategy strategy = Strategy::Centralized;
  int n_shared = 0;
  double u_cen = 0.0;
  double lower = 0.0;
  double gap_rel_percent = 0.0;
  std::string status;  // ok | infeasible_rounding | degenerate_reference |
                       // bound_violation | solver_failure | timeout
};

struct StrategyAggregate {
  Strategy strategy = Strategy::Centralized;
  int n_shared = 0;
  double mean_gap = 0.0;
  double std_gap = 0.0;  // sample standard deviation
  int trials_ok = 0;
  int trials_failed = 0;
};

struct TrialStats {
  std::vector<TrialRecord> records;
  std::vector<StrategyAggregate> aggregates;
  int rounding_anomalies = 0;  // trials with L_dec > L_cen, both finite
  int bound_violations = 0;    // stacked relaxed value above U_cen, or L above U_cen
  int degenerate_references = 0;
};

/// Run cfg.trials independent trials at cfg.n_shared. jobs <= 0 uses the
/// hardware concurrency; results do not depend on the job count.
TrialStats run_trials(const ExperimentConfig& cfg, int jobs = 0);

/// Rerun the trial set for each N in n_values with the same per-trial
/// seeds. Centralized and naive results are computed once per trial and
/// repeated across N columns.
TrialStats sweep_shared_vectors(const ExperimentConfig& cfg, const std::vector<int>& n_values,
                                int jobs = 0);

/// CSV renderings. Per-trial columns: trial,strategy,N,U_cen,L,
/// gap_rel_percent,status. Summary columns: strategy,N,mean_gap,std_gap,
/// trials_ok,trials_failed.
std::string trials_to_csv(const TrialStats& stats);
std::string summary_to_csv(const TrialStats& stats);

}  // namespace sensel
