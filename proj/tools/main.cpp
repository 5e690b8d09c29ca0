// Command-line front-end for the sensor selection library.
//
// Subcommands:
//   gen         write a correlated instance as A1.csv / A2.csv
//   solve       run one strategy on a matrix, outcome JSON on stdout
//   session     run the two-node exchange protocol and write the message
//   experiment  Monte-Carlo trials over the configured strategies
//   sweep-n     rerun the trial set for each N in a list, paired seeds
//
// Every run echoes its effective configuration (defaults included) to
// stderr. Flags override config-file values, which override the
// SENSEL_SEED environment variable, which overrides built-in defaults.
//
// Exit codes: 0 success, 1 usage or input errors, 2 numerical failures.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sensel/csv_io.hpp"
#include "sensel/errors.hpp"
#include "sensel/exchange.hpp"
#include "sensel/experiments.hpp"
#include "sensel/strategies.hpp"

namespace {

using namespace sensel;

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("SENSEL_SEED");
  if (!raw || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') {
    throw InvalidArgument(std::string("SENSEL_SEED is not an integer: ") + raw);
  }
  return static_cast<std::uint64_t>(value);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string field = text.substr(start, end - start);
    if (field.empty()) throw InvalidArgument("empty entry in integer list");
    char* parse_end = nullptr;
    const long value = std::strtol(field.c_str(), &parse_end, 10);
    if (parse_end == field.c_str() || *parse_end != '\0') {
      throw InvalidArgument("not an integer: " + field);
    }
    values.push_back(static_cast<int>(value));
    if (end == text.size()) break;
    start = end + 1;
  }
  return values;
}

void add_solver_flags(CLI::App* cmd, SolverParams& params) {
  cmd->add_option("--kappa0", params.kappa_initial, "initial barrier weight");
  cmd->add_option("--kappa-shrink", params.kappa_shrink, "barrier shrink factor per stage");
  cmd->add_option("--barrier-tol", params.barrier_tolerance, "outer stopping tolerance");
  cmd->add_option("--newton-tol", params.newton_tolerance, "Newton decrement tolerance");
  cmd->add_option("--kkt-tol", params.kkt_tolerance, "projected-gradient tolerance");
  cmd->add_option("--max-newton", params.max_newton_iterations, "Newton iterations per stage");
  cmd->add_option("--max-outer", params.max_outer_stages, "barrier stages");
}

struct GenOptions {
  int m = 100;
  int n = 40;
  std::uint64_t seed = 0;
  double sigma = 0.1;
  int pairs = -1;  // default min(15, m/2)
  std::string out_dir = ".";
};

int run_gen(const GenOptions& opt, bool seed_given) {
  ExperimentConfig cfg;
  cfg.m = opt.m;
  cfg.n = opt.n;
  cfg.sigma_corr = opt.sigma;
  cfg.num_correlated_pairs = opt.pairs >= 0 ? opt.pairs : std::min(15, opt.m / 2);
  std::uint64_t seed = opt.seed;
  if (!seed_given) {
    if (auto env = env_seed()) seed = *env;
  }

  nlohmann::ordered_json echo{{"subcommand", "gen"},
                              {"m", cfg.m},
                              {"n", cfg.n},
                              {"seed", seed},
                              {"sigma_corr", cfg.sigma_corr},
                              {"num_correlated_pairs", cfg.num_correlated_pairs},
                              {"out_dir", opt.out_dir}};
  std::cerr << "config: " << echo.dump() << "\n";

  Partition instance = generate_instance(cfg, seed);
  const auto dir = std::filesystem::path(opt.out_dir);
  write_matrix_csv((dir / "A1.csv").string(), instance.a1.rows());
  write_matrix_csv((dir / "A2.csv").string(), instance.a2.rows());
  std::cerr << "wrote " << (dir / "A1.csv").string() << " and "
            << (dir / "A2.csv").string() << "\n";
  return 0;
}

struct SolveOptions {
  std::string matrix_path;
  std::string a1_path;
  std::string a2_path;
  int k = 0;
  std::string strategy = "centralized";
  int n_shared = 5;
  std::string selection_out;
  std::string message_out = "shared_message.json";
  SolverParams solver;
};

Partition load_partition(const SolveOptions& opt) {
  if (!opt.a1_path.empty() && !opt.a2_path.empty()) {
    return Partition(MeasurementMatrix(load_matrix_csv(opt.a1_path)),
                     MeasurementMatrix(load_matrix_csv(opt.a2_path)));
  }
  if (opt.matrix_path.empty()) {
    throw InvalidArgument("decentralized strategies need --matrix or --a1/--a2");
  }
  Eigen::MatrixXd full = load_matrix_csv(opt.matrix_path);
  if (full.rows() % 2 != 0) {
    throw InvalidArgument("--matrix needs an even row count for the half/half partition");
  }
  const Eigen::Index half = full.rows() / 2;
  return Partition(MeasurementMatrix(full.topRows(half)),
                   MeasurementMatrix(full.bottomRows(half)));
}

int run_solve(const SolveOptions& opt, bool as_session) {
  const auto strategy = parse_strategy(opt.strategy);
  if (!strategy) throw InvalidArgument("unknown strategy: " + opt.strategy);

  nlohmann::ordered_json echo{{"subcommand", as_session ? "session" : "solve"},
                              {"matrix", opt.matrix_path},
                              {"a1", opt.a1_path},
                              {"a2", opt.a2_path},
                              {"k", opt.k},
                              {"strategy", opt.strategy},
                              {"N", opt.n_shared}};
  std::cerr << "config: " << echo.dump() << "\n";

  StrategyOutcome outcome = [&] {
    if (*strategy == Strategy::Centralized) {
      if (as_session) {
        throw InvalidArgument("a session runs a decentralized strategy: naive, fdm or lpm");
      }
      if (opt.matrix_path.empty()) {
        throw InvalidArgument("centralized solve needs --matrix");
      }
      MeasurementMatrix a(load_matrix_csv(opt.matrix_path));
      return select_centralized(a, opt.k, opt.solver);
    }
    Partition p = load_partition(opt);
    if (as_session) {
      SessionResult session = run_session(p, opt.k, opt.n_shared, *strategy, opt.solver);
      write_text_file(opt.message_out, session.transcript.message);
      std::cerr << "transcript: " << session.transcript.payload_scalars << " scalars, "
                << session.transcript.payload_bytes << " bytes, message written to "
                << opt.message_out << "\n";
      return session.outcome;
    }
    switch (*strategy) {
      case Strategy::NaiveDecentralized: return select_naive(p, opt.k, opt.solver);
      case Strategy::FocusedDiversity: return select_fdm(p, opt.k, opt.n_shared, opt.solver);
      default: return select_lpm(p, opt.k, opt.n_shared, opt.solver);
    }
  }();

  std::cout << to_json_string(outcome) << "\n";
  if (!opt.selection_out.empty()) {
    write_text_file(opt.selection_out, selection_to_csv(outcome.z_boolean));
  }
  return 0;
}

struct ExperimentOptions {
  std::string config_path;
  std::string out_path = "results.csv";
  std::string summary_path = "summary.csv";
  std::string n_list;
  int jobs = 0;
};

bool flag_given(CLI::App* cmd, const std::string& name) {
  const CLI::Option* option = cmd->get_option_no_throw(name);
  return option != nullptr && option->count() > 0;
}

ExperimentConfig build_config(const ExperimentOptions& opt, CLI::App* cmd,
                              const ExperimentConfig& overrides) {
  ExperimentConfig base;
  if (auto env = env_seed()) base.master_seed = *env;
  ExperimentConfig cfg = opt.config_path.empty()
                             ? base
                             : ExperimentConfig::from_json_file(opt.config_path, base);
  // Flags beat the config file.
  if (flag_given(cmd, "--trials")) cfg.trials = overrides.trials;
  if (flag_given(cmd, "--seed")) cfg.master_seed = overrides.master_seed;
  if (flag_given(cmd, "--m")) cfg.m = overrides.m;
  if (flag_given(cmd, "--n")) cfg.n = overrides.n;
  if (flag_given(cmd, "--k")) cfg.k_s = overrides.k_s;
  if (flag_given(cmd, "--n-shared")) cfg.n_shared = overrides.n_shared;
  if (flag_given(cmd, "--sigma")) cfg.sigma_corr = overrides.sigma_corr;
  if (flag_given(cmd, "--pairs")) cfg.num_correlated_pairs = overrides.num_correlated_pairs;
  if (flag_given(cmd, "--kappa0")) cfg.solver.kappa_initial = overrides.solver.kappa_initial;
  if (flag_given(cmd, "--kappa-shrink"))
    cfg.solver.kappa_shrink = overrides.solver.kappa_shrink;
  if (flag_given(cmd, "--barrier-tol"))
    cfg.solver.barrier_tolerance = overrides.solver.barrier_tolerance;
  if (flag_given(cmd, "--newton-tol"))
    cfg.solver.newton_tolerance = overrides.solver.newton_tolerance;
  if (flag_given(cmd, "--kkt-tol")) cfg.solver.kkt_tolerance = overrides.solver.kkt_tolerance;
  if (flag_given(cmd, "--max-newton"))
    cfg.solver.max_newton_iterations = overrides.solver.max_newton_iterations;
  if (flag_given(cmd, "--max-outer"))
    cfg.solver.max_outer_stages = overrides.solver.max_outer_stages;
  return cfg;
}

int run_experiment(const ExperimentOptions& opt, const ExperimentConfig& cfg) {
  std::cerr << "config: " << cfg.to_json_string() << "\n";
  std::cerr << "jobs: " << opt.jobs << "\n";
  TrialStats stats = run_trials(cfg, opt.jobs);
  write_text_file(opt.out_path, trials_to_csv(stats));
  write_text_file(opt.summary_path, summary_to_csv(stats));
  std::cerr << "rounding anomalies (L_dec > L_cen): " << stats.rounding_anomalies << "\n";
  std::cerr << "wrote " << opt.out_path << " and " << opt.summary_path << "\n";
  return 0;
}

int run_sweep(const ExperimentOptions& opt, const ExperimentConfig& cfg) {
  std::vector<int> n_values = opt.n_list.empty() ? cfg.n_sweep : parse_int_list(opt.n_list);
  if (n_values.empty()) {
    throw InvalidArgument("sweep-n needs --n-list or n_sweep in the config");
  }
  std::cerr << "config: " << cfg.to_json_string() << "\n";
  std::cerr << "jobs: " << opt.jobs << ", n_values:";
  for (int v : n_values) std::cerr << " " << v;
  std::cerr << "\n";
  TrialStats stats = sweep_shared_vectors(cfg, n_values, opt.jobs);
  write_text_file(opt.out_path, trials_to_csv(stats));
  write_text_file(opt.summary_path, summary_to_csv(stats));
  std::cerr << "wrote " << opt.out_path << " and " << opt.summary_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized sensor selection via log-det maximization"};
  app.require_subcommand(1);

  GenOptions gen_opt;
  auto* gen = app.add_subcommand("gen", "Generate a correlated instance as A1.csv/A2.csv");
  gen->add_option("--m", gen_opt.m, "total sensor count (even)");
  gen->add_option("--n", gen_opt.n, "parameter count");
  auto* gen_seed = gen->add_option("--seed", gen_opt.seed, "instance seed");
  gen->add_option("--sigma", gen_opt.sigma, "correlation strength in [0,1]");
  gen->add_option("--pairs", gen_opt.pairs, "correlated row pairs (default min(15, m/2))");
  gen->add_option("--out-dir", gen_opt.out_dir, "output directory");

  SolveOptions solve_opt;
  auto* solve = app.add_subcommand("solve", "Run one selection strategy");
  solve->add_option("--matrix", solve_opt.matrix_path, "full measurement matrix CSV");
  solve->add_option("--a1", solve_opt.a1_path, "node-1 half CSV");
  solve->add_option("--a2", solve_opt.a2_path, "node-2 half CSV");
  solve->add_option("--k", solve_opt.k, "sensor budget")->required();
  solve->add_option("--strategy", solve_opt.strategy,
                    "centralized | decentralized | fdm | lpm");
  solve->add_option("--n-shared", solve_opt.n_shared, "shared vectors N");
  solve->add_option("--selection-out", solve_opt.selection_out,
                    "write the Boolean selection as a CSV row");
  add_solver_flags(solve, solve_opt.solver);

  SolveOptions session_opt;
  session_opt.strategy = "fdm";
  auto* session = app.add_subcommand("session", "Run the two-node exchange protocol");
  session->add_option("--matrix", session_opt.matrix_path, "full measurement matrix CSV");
  session->add_option("--a1", session_opt.a1_path, "node-1 half CSV");
  session->add_option("--a2", session_opt.a2_path, "node-2 half CSV");
  session->add_option("--k", session_opt.k, "sensor budget")->required();
  session->add_option("--strategy", session_opt.strategy, "decentralized | fdm | lpm");
  session->add_option("--n-shared", session_opt.n_shared, "shared vectors N");
  session->add_option("--message-out", session_opt.message_out,
                      "where to write the shared-vector message JSON");
  session->add_option("--selection-out", session_opt.selection_out,
                      "write the Boolean selection as a CSV row");
  add_solver_flags(session, session_opt.solver);

  ExperimentOptions exp_opt;
  ExperimentConfig exp_overrides;
  auto* experiment = app.add_subcommand("experiment", "Monte-Carlo suboptimality gaps");
  experiment->add_option("--config", exp_opt.config_path, "experiment config JSON");
  experiment->add_option("--out", exp_opt.out_path, "per-trial CSV path");
  experiment->add_option("--summary", exp_opt.summary_path, "summary CSV path");
  experiment->add_option("--jobs", exp_opt.jobs, "parallel trials (0 = hardware)");
  experiment->add_option("--trials", exp_overrides.trials, "trial count");
  experiment->add_option("--seed", exp_overrides.master_seed, "master seed");
  experiment->add_option("--m", exp_overrides.m, "sensor count");
  experiment->add_option("--n", exp_overrides.n, "parameter count");
  experiment->add_option("--k", exp_overrides.k_s, "budget k_s");
  experiment->add_option("--n-shared", exp_overrides.n_shared, "shared vectors N");
  experiment->add_option("--sigma", exp_overrides.sigma_corr, "correlation strength");
  experiment->add_option("--pairs", exp_overrides.num_correlated_pairs, "correlated pairs");
  add_solver_flags(experiment, exp_overrides.solver);

  ExperimentOptions sweep_opt;
  sweep_opt.out_path = "sweep_results.csv";
  sweep_opt.summary_path = "sweep_summary.csv";
  ExperimentConfig sweep_overrides;
  auto* sweep = app.add_subcommand("sweep-n", "Sweep the shared-vector count N");
  sweep->add_option("--config", sweep_opt.config_path, "experiment config JSON");
  sweep->add_option("--n-list", sweep_opt.n_list, "comma-separated N values");
  sweep->add_option("--out", sweep_opt.out_path, "per-trial CSV path");
  sweep->add_option("--summary", sweep_opt.summary_path, "summary CSV path");
  sweep->add_option("--jobs", sweep_opt.jobs, "parallel trials (0 = hardware)");
  sweep->add_option("--trials", sweep_overrides.trials, "trial count");
  sweep->add_option("--seed", sweep_overrides.master_seed, "master seed");
  sweep->add_option("--m", sweep_overrides.m, "sensor count");
  sweep->add_option("--n", sweep_overrides.n, "parameter count");
  sweep->add_option("--k", sweep_overrides.k_s, "budget k_s");
  sweep->add_option("--sigma", sweep_overrides.sigma_corr, "correlation strength");
  sweep->add_option("--pairs", sweep_overrides.num_correlated_pairs, "correlated pairs");
  add_solver_flags(sweep, sweep_overrides.solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return run_gen(gen_opt, gen_seed->count() > 0);
    if (solve->parsed()) return run_solve(solve_opt, /*as_session=*/false);
    if (session->parsed()) return run_solve(session_opt, /*as_session=*/true);
    if (experiment->parsed()) {
      return run_experiment(exp_opt, build_config(exp_opt, experiment, exp_overrides));
    }
    if (sweep->parsed()) {
      return run_sweep(sweep_opt, build_config(sweep_opt, sweep, sweep_overrides));
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
