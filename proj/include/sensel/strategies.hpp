#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sensel/barrier_solver.hpp"
#include "sensel/model.hpp"

namespace sensel {

enum class Strategy { Centralized, NaiveDecentralized, FocusedDiversity, LinearPenalty };

/// Short names used in CSV/JSON output and configs: "centralized",
/// "decentralized", "fdm", "lpm".
std::string strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);

/// The N vectors g_j = lambda_j u_j that node 1 shares with node 2,
/// ordered by non-increasing norm.
struct SharedVectorSet {
  Eigen::Index dimension = 0;  // n
  std::vector<Eigen::VectorXd> vectors;

  int count() const { return static_cast<int>(vectors.size()); }
};

enum class OutcomeStatus { Ok, InfeasibleRounding };

struct SolveStats {
  std::string role;  // "centralized", "node1", "node2", ...
  int outer = 0;
  int newton = 0;
};

/// Result of one strategy on one instance. The upper bound is always the
/// centralized relaxation value; the lower bound is the centralized
/// objective at the rounded Boolean selection (-inf when that selection is
/// rank-deficient, with status InfeasibleRounding).
struct StrategyOutcome {
  Strategy strategy;
  SelectionVector z_relaxed;
  SelectionVector z_boolean;
  BoundsReport bounds;
  OutcomeStatus status = OutcomeStatus::Ok;
  std::vector<SolveStats> solves;
};

/// JSON rendering of an outcome (strategy, z vectors, bounds, iteration
/// counts). Non-finite bounds serialize as null.
std::string to_json_string(const StrategyOutcome& outcome);

/// Set the k largest entries to 1 (ties broken by lowest index), rest to 0.
SelectionVector round_simple(const SelectionVector& z, int k);

/// Top-N eigenpairs of A1^T diag(z1) A1 as the products g_j = lambda_j u_j.
/// Eigenvectors are unit norm with the sign fixed so that the first
/// component of largest absolute value is positive.
SharedVectorSet extract_shared_vectors(const MeasurementMatrix& a1,
                                       const SelectionVector& z1_boolean, int n_shared);

/// LPM cost vector: c_i = sum_j |a_{2i}^T g_j| / ||a_{2i}||^2.
Eigen::VectorXd lpm_costs(const MeasurementMatrix& a2, const SharedVectorSet& shared);

/// Shared per-instance work for the decentralized strategies: the
/// centralized relaxation (the global upper bound) and node 1's local
/// solve, both reused by naive / FDM / LPM on the same partition.
class TwoNodePipeline {
 public:
  TwoNodePipeline(Partition partition, int k, SolverParams params = SolverParams{});

  double upper_bound() const { return upper_.objective; }
  const RelaxedSolution& node1_relaxed() const { return node1_.relaxed; }
  const SelectionVector& node1_rounded() const { return node1_.rounded; }
  const Partition& partition() const { return partition_; }
  const MeasurementMatrix& full_matrix() const { return full_; }

  SharedVectorSet shared_vectors(int n_shared) const;

  /// Centralized outcome from the cached relaxation (no extra solve).
  StrategyOutcome centralized() const;
  StrategyOutcome naive() const;
  StrategyOutcome fdm(int n_shared) const;
  StrategyOutcome lpm(int n_shared) const;

  /// Node-2 solves against an explicit shared set; the exchange session
  /// routes decoded messages through these.
  StrategyOutcome fdm_with(const SharedVectorSet& shared) const;
  StrategyOutcome lpm_with(const SharedVectorSet& shared) const;

 private:
  struct NodeSolution {
    RelaxedSolution relaxed;
    SelectionVector rounded;
  };

  static NodeSolution solve_node(const MeasurementMatrix& a, int budget,
                                 const SolverParams& params,
                                 const std::optional<Eigen::MatrixXd>& s = std::nullopt,
                                 const std::optional<Eigen::VectorXd>& c = std::nullopt);
  StrategyOutcome assemble(Strategy strategy, const NodeSolution& node2,
                           std::vector<SolveStats> solves) const;

  Partition partition_;
  MeasurementMatrix full_;
  int k_;
  SolverParams params_;
  RelaxedSolution upper_;
  NodeSolution node1_;
  SolveStats upper_stats_;
  SolveStats node1_stats_;
};

/// Solve the relaxed centralized problem, round, and report both bounds.
StrategyOutcome select_centralized(const MeasurementMatrix& a, int k,
                                   const SolverParams& params = SolverParams{});

/// Naive decentralized selection: each node solves its local problem with
/// budget k/2 and no communication.
StrategyOutcome select_naive(const Partition& p, int k,
                             const SolverParams& params = SolverParams{});

/// Focused diversity: node 2 augments its information matrix with
/// sum_j g_j g_j^T built from node 1's top eigenpairs.
StrategyOutcome select_fdm(const Partition& p, int k, int n_shared,
                           const SolverParams& params = SolverParams{});

/// Linear penalty: node 2 subtracts the cost c^T z_2 penalizing rows
/// aligned with node 1's shared directions.
StrategyOutcome select_lpm(const Partition& p, int k, int n_shared,
                           const SolverParams& params = SolverParams{});

}  // namespace sensel
