#include "sensel/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sensel/errors.hpp"
#include "sensel/rng.hpp"

namespace sensel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double value, const char* fmt) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), fmt, value);
  return buffer;
}

bool contains(const std::vector<Strategy>& strategies, Strategy s) {
  return std::find(strategies.begin(), strategies.end(), s) != strategies.end();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (m < 2 || m % 2 != 0) throw InvalidArgument("m must be even and at least 2");
  if (n < 1) throw InvalidArgument("n must be at least 1");
  if (m / 2 < n) throw InvalidArgument("each half needs at least n rows (m/2 >= n)");
  if (k_s % 2 != 0) throw InvalidArgument("k_s must be even");
  if (!(1 <= k_s / 2 && k_s / 2 < m / 2)) {
    throw InvalidArgument("k_s/2 must satisfy 1 <= k_s/2 < m/2");
  }
  if (k_s < n) throw InvalidArgument("k_s must be at least n");
  if (n_shared < 0 || n_shared > n) throw InvalidArgument("N must lie in [0, n]");
  if (!(sigma_corr >= 0.0 && sigma_corr <= 1.0)) {
    throw InvalidArgument("sigma_corr must lie in [0, 1]");
  }
  if (num_correlated_pairs < 0 || num_correlated_pairs > m / 2) {
    throw InvalidArgument("num_correlated_pairs must lie in [0, m/2]");
  }
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (strategies.empty()) throw InvalidArgument("at least one strategy is required");
  for (int n_value : n_sweep) {
    if (n_value < 0 || n_value > n) throw InvalidArgument("n_sweep values must lie in [0, n]");
  }
  if (!(trial_seconds_budget > 0.0)) {
    throw InvalidArgument("trial_seconds_budget must be positive");
  }
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  return from_json_string(text, ExperimentConfig{});
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  return from_json_file(path, ExperimentConfig{});
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text,
                                                    ExperimentConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
  }

  ExperimentConfig cfg = std::move(base);
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "m") cfg.m = value.get<int>();
      else if (key == "n") cfg.n = value.get<int>();
      else if (key == "k_s") cfg.k_s = value.get<int>();
      else if (key == "N") cfg.n_shared = value.get<int>();
      else if (key == "sigma_corr") cfg.sigma_corr = value.get<double>();
      else if (key == "num_correlated_pairs") cfg.num_correlated_pairs = value.get<int>();
      else if (key == "trials") cfg.trials = value.get<int>();
      else if (key == "master_seed") cfg.master_seed = value.get<std::uint64_t>();
      else if (key == "trial_seconds_budget") cfg.trial_seconds_budget = value.get<double>();
      else if (key == "strategies") {
        cfg.strategies.clear();
        for (const auto& name : value) {
          auto s = parse_strategy(name.get<std::string>());
          if (!s) throw InvalidArgument("unknown strategy: " + name.get<std::string>());
          cfg.strategies.push_back(*s);
        }
      } else if (key == "n_sweep") {
        cfg.n_sweep = value.get<std::vector<int>>();
      } else if (key == "solver") {
        for (const auto& [skey, svalue] : value.items()) {
          if (skey == "kappa_initial") cfg.solver.kappa_initial = svalue.get<double>();
          else if (skey == "kappa_shrink") cfg.solver.kappa_shrink = svalue.get<double>();
          else if (skey == "barrier_tolerance") cfg.solver.barrier_tolerance = svalue.get<double>();
          else if (skey == "newton_tolerance") cfg.solver.newton_tolerance = svalue.get<double>();
          else if (skey == "kkt_tolerance") cfg.solver.kkt_tolerance = svalue.get<double>();
          else if (skey == "max_newton_iterations")
            cfg.solver.max_newton_iterations = svalue.get<int>();
          else if (skey == "max_outer_stages") cfg.solver.max_outer_stages = svalue.get<int>();
          else if (skey == "line_search_alpha") cfg.solver.line_search_alpha = svalue.get<double>();
          else if (skey == "line_search_beta") cfg.solver.line_search_beta = svalue.get<double>();
          else if (skey == "boundary_fraction") cfg.solver.boundary_fraction = svalue.get<double>();
          else throw InvalidArgument("unknown solver config key: " + skey);
        }
      } else {
        throw InvalidArgument("unknown experiment config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad experiment config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path,
                                                  ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str(), std::move(base));
}

std::string ExperimentConfig::to_json_string() const {
  nlohmann::ordered_json j;
  j["m"] = m;
  j["n"] = n;
  j["k_s"] = k_s;
  j["N"] = n_shared;
  j["sigma_corr"] = sigma_corr;
  j["num_correlated_pairs"] = num_correlated_pairs;
  j["trials"] = trials;
  j["master_seed"] = master_seed;
  std::vector<std::string> names;
  names.reserve(strategies.size());
  for (Strategy s : strategies) names.push_back(strategy_name(s));
  j["strategies"] = names;
  j["n_sweep"] = n_sweep;
  j["trial_seconds_budget"] = trial_seconds_budget;
  j["solver"] = {{"kappa_initial", solver.kappa_initial},
                 {"kappa_shrink", solver.kappa_shrink},
                 {"barrier_tolerance", solver.barrier_tolerance},
                 {"newton_tolerance", solver.newton_tolerance},
                 {"kkt_tolerance", solver.kkt_tolerance},
                 {"max_newton_iterations", solver.max_newton_iterations},
                 {"max_outer_stages", solver.max_outer_stages},
                 {"line_search_alpha", solver.line_search_alpha},
                 {"line_search_beta", solver.line_search_beta},
                 {"boundary_fraction", solver.boundary_fraction}};
  return j.dump();
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  // One splitmix64 stream per trial; see Rng::for_stream.
  return Rng::for_stream(master_seed, static_cast<std::uint64_t>(trial)).next_u64();
}

Partition generate_instance(const ExperimentConfig& cfg, std::uint64_t seed,
                            std::vector<std::pair<int, int>>* correlated_pairs) {
  if (cfg.m < 2 || cfg.m % 2 != 0) throw InvalidArgument("m must be even and at least 2");
  if (cfg.n < 1 || cfg.m / 2 < cfg.n) {
    throw InvalidArgument("instance generation needs m/2 >= n >= 1");
  }
  if (cfg.num_correlated_pairs < 0 || cfg.num_correlated_pairs > cfg.m / 2) {
    throw InvalidArgument("num_correlated_pairs must lie in [0, m/2]");
  }
  if (!(cfg.sigma_corr >= 0.0 && cfg.sigma_corr <= 1.0)) {
    throw InvalidArgument("sigma_corr must lie in [0, 1]");
  }
  const int half = cfg.m / 2;
  Rng rng(seed);

  Eigen::MatrixXd a1(half, cfg.n);
  Eigen::MatrixXd a2(half, cfg.n);
  for (int i = 0; i < half; ++i) {
    for (int j = 0; j < cfg.n; ++j) a1(i, j) = rng.normal();
  }
  for (int i = 0; i < half; ++i) {
    for (int j = 0; j < cfg.n; ++j) a2(i, j) = rng.normal();
  }

  // Distinct rows per side, one A1 row paired with one A2 row.
  auto sample_rows = [&](int count) {
    std::vector<int> indices(static_cast<std::size_t>(half));
    std::iota(indices.begin(), indices.end(), 0);
    for (int p = 0; p < count; ++p) {
      const auto pick = p + static_cast<int>(rng.uniform_below(
                                static_cast<std::uint64_t>(half - p)));
      std::swap(indices[static_cast<std::size_t>(p)], indices[static_cast<std::size_t>(pick)]);
    }
    indices.resize(static_cast<std::size_t>(count));
    return indices;
  };
  const std::vector<int> rows1 = sample_rows(cfg.num_correlated_pairs);
  const std::vector<int> rows2 = sample_rows(cfg.num_correlated_pairs);

  const double base_weight = std::sqrt(1.0 - cfg.sigma_corr * cfg.sigma_corr);
  if (correlated_pairs) correlated_pairs->clear();
  for (int p = 0; p < cfg.num_correlated_pairs; ++p) {
    Eigen::VectorXd b(cfg.n), w1(cfg.n), w2(cfg.n);
    for (int j = 0; j < cfg.n; ++j) b(j) = rng.normal();
    for (int j = 0; j < cfg.n; ++j) w1(j) = rng.normal();
    for (int j = 0; j < cfg.n; ++j) w2(j) = rng.normal();
    a1.row(rows1[static_cast<std::size_t>(p)]) =
        (base_weight * b + cfg.sigma_corr * w1).transpose();
    a2.row(rows2[static_cast<std::size_t>(p)]) =
        (base_weight * b + cfg.sigma_corr * w2).transpose();
    if (correlated_pairs) {
      correlated_pairs->emplace_back(rows1[static_cast<std::size_t>(p)],
                                     rows2[static_cast<std::size_t>(p)]);
    }
  }

  return Partition(MeasurementMatrix(std::move(a1)), MeasurementMatrix(std::move(a2)));
}

namespace {

// Everything one trial contributes: one record per (N column, strategy).
struct TrialOutput {
  std::vector<TrialRecord> records;
  bool rounding_anomaly = false;
  int bound_violations = 0;
  bool degenerate_reference = false;
};

TrialRecord make_record(int trial, Strategy strategy, int n_shared, double u_cen,
                        double lower, double rel, std::string status) {
  TrialRecord record;
  record.trial = trial;
  record.strategy = strategy;
  record.n_shared = n_shared;
  record.u_cen = u_cen;
  record.lower = lower;
  record.gap_rel_percent = rel;
  record.status = std::move(status);
  return record;
}

TrialOutput run_one_trial(const ExperimentConfig& cfg, const std::vector<int>& n_values,
                          int trial) {
  using Clock = std::chrono::steady_clock;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(cfg.trial_seconds_budget));
  const auto expired = [&] { return Clock::now() > deadline; };

  TrialOutput out;
  const auto fail_all = [&](const std::string& status) {
    out.records.clear();
    for (int n_value : n_values) {
      for (Strategy s : cfg.strategies) {
        out.records.push_back(make_record(trial, s, n_value, kNaN, kNaN, kNaN, status));
      }
    }
  };

  std::optional<TwoNodePipeline> pipeline;
  try {
    Partition instance = generate_instance(cfg, trial_seed(cfg.master_seed, trial));
    pipeline.emplace(std::move(instance), cfg.k_s, cfg.solver);
  } catch (const std::exception&) {
    fail_all("solver_failure");
    return out;
  }

  const double u_cen = pipeline->upper_bound();
  const bool degenerate = std::abs(u_cen) <= kGapReferenceEpsilon;
  out.degenerate_reference = degenerate;

  // Criterion: the stacked relaxed vector is centrally feasible, so its
  // centralized value may not exceed the global upper bound; same for the
  // Boolean lower bound.
  const auto check_bounds = [&](const StrategyOutcome& outcome) -> bool {
    const double tolerance = 1e-6;
    if (std::isfinite(outcome.bounds.lower) && outcome.bounds.lower > u_cen + tolerance) {
      return false;
    }
    if (outcome.strategy != Strategy::Centralized) {
      const double stacked = log_det_objective(pipeline->full_matrix(), outcome.z_relaxed);
      if (stacked > u_cen + tolerance) return false;
    }
    return true;
  };

  std::optional<StrategyOutcome> centralized;
  std::optional<StrategyOutcome> naive;
  const auto compute_once = [&](std::optional<StrategyOutcome>& slot, auto&& make) {
    if (!slot) slot = make();
    return *slot;
  };

  for (int n_value : n_values) {
    for (Strategy s : cfg.strategies) {
      if (expired()) {
        out.records.push_back(make_record(trial, s, n_value, u_cen, kNaN, kNaN, "timeout"));
        continue;
      }
      try {
        StrategyOutcome outcome =
            s == Strategy::Centralized
                ? compute_once(centralized, [&] { return pipeline->centralized(); })
            : s == Strategy::NaiveDecentralized
                ? compute_once(naive, [&] { return pipeline->naive(); })
            : s == Strategy::FocusedDiversity ? pipeline->fdm(n_value)
                                              : pipeline->lpm(n_value);

        std::string status = "ok";
        if (outcome.status == OutcomeStatus::InfeasibleRounding) {
          status = "infeasible_rounding";
        } else if (!check_bounds(outcome)) {
          status = "bound_violation";
          ++out.bound_violations;
        } else if (degenerate) {
          status = "degenerate_reference";
        }
        out.records.push_back(make_record(trial, s, n_value, u_cen, outcome.bounds.lower,
                                          outcome.bounds.relative_gap_percent,
                                          std::move(status)));
      } catch (const std::exception&) {
        out.records.push_back(
            make_record(trial, s, n_value, u_cen, kNaN, kNaN, "solver_failure"));
      }
    }
  }

  if (centralized && naive && std::isfinite(centralized->bounds.lower) &&
      std::isfinite(naive->bounds.lower) &&
      naive->bounds.lower > centralized->bounds.lower) {
    out.rounding_anomaly = true;
  }
  return out;
}

TrialStats run_impl(const ExperimentConfig& cfg, const std::vector<int>& n_values, int jobs) {
  cfg.validate();
  for (int n_value : n_values) {
    if (n_value < 0 || n_value > cfg.n) {
      throw InvalidArgument("sweep N values must lie in [0, n]");
    }
  }

  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, cfg.trials);

  std::vector<TrialOutput> outputs(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1)) {
      outputs[static_cast<std::size_t>(t)] = run_one_trial(cfg, n_values, t);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& thread : pool) thread.join();
  }

  // Collect in trial order so the result is independent of scheduling.
  TrialStats stats;
  for (const auto& output : outputs) {
    stats.records.insert(stats.records.end(), output.records.begin(), output.records.end());
    if (output.rounding_anomaly) ++stats.rounding_anomalies;
    stats.bound_violations += output.bound_violations;
    if (output.degenerate_reference) ++stats.degenerate_references;
  }

  // One aggregate per (strategy, N column), strategy-major.
  for (Strategy s : cfg.strategies) {
    for (std::size_t column = 0; column < n_values.size(); ++column) {
      const int n_value = n_values[column];
      std::vector<double> gaps;
      int failed = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        const auto& records = outputs[static_cast<std::size_t>(t)].records;
        const std::size_t per_column = cfg.strategies.size();
        const std::size_t base = column * per_column;
        for (std::size_t i = 0; i < per_column; ++i) {
          const TrialRecord& record = records[base + i];
          if (record.strategy != s) continue;
          if (record.status == "ok") gaps.push_back(record.gap_rel_percent);
          else ++failed;
        }
      }
      StrategyAggregate agg;
      agg.strategy = s;
      agg.n_shared = n_value;
      agg.trials_ok = static_cast<int>(gaps.size());
      agg.trials_failed = failed;
      if (!gaps.empty()) {
        agg.mean_gap = std::accumulate(gaps.begin(), gaps.end(), 0.0) /
                       static_cast<double>(gaps.size());
        if (gaps.size() > 1) {
          double ss = 0.0;
          for (double g : gaps) ss += (g - agg.mean_gap) * (g - agg.mean_gap);
          agg.std_gap = std::sqrt(ss / static_cast<double>(gaps.size() - 1));
        }
      } else {
        agg.mean_gap = kNaN;
        agg.std_gap = kNaN;
      }
      stats.aggregates.push_back(std::move(agg));
    }
  }
  return stats;
}

}  // namespace

TrialStats run_trials(const ExperimentConfig& cfg, int jobs) {
  return run_impl(cfg, {cfg.n_shared}, jobs);
}

TrialStats sweep_shared_vectors(const ExperimentConfig& cfg, const std::vector<int>& n_values,
                                int jobs) {
  if (n_values.empty()) throw InvalidArgument("sweep requires at least one N value");
  return run_impl(cfg, n_values, jobs);
}

std::string trials_to_csv(const TrialStats& stats) {
  std::string csv = "trial,strategy,N,U_cen,L,gap_rel_percent,status\n";
  for (const auto& record : stats.records) {
    csv += std::to_string(record.trial);
    csv += ',';
    csv += strategy_name(record.strategy);
    csv += ',';
    csv += std::to_string(record.n_shared);
    csv += ',';
    csv += format_double(record.u_cen, "%.17g");
    csv += ',';
    csv += format_double(record.lower, "%.17g");
    csv += ',';
    csv += format_double(record.gap_rel_percent, "%.17g");
    csv += ',';
    csv += record.status;
    csv += '\n';
  }
  return csv;
}

std::string summary_to_csv(const TrialStats& stats) {
  std::string csv = "strategy,N,mean_gap,std_gap,trials_ok,trials_failed\n";
  for (const auto& agg : stats.aggregates) {
    csv += strategy_name(agg.strategy);
    csv += ',';
    csv += std::to_string(agg.n_shared);
    csv += ',';
    csv += format_double(agg.mean_gap, "%.10g");
    csv += ',';
    csv += format_double(agg.std_gap, "%.10g");
    csv += ',';
    csv += std::to_string(agg.trials_ok);
    csv += ',';
    csv += std::to_string(agg.trials_failed);
    csv += '\n';
  }
  return csv;
}

}  // namespace sensel
