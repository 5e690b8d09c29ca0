#include "sensel/strategies.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sensel/errors.hpp"

namespace sensel {

namespace {

void check_decentralized_budget(const Partition& p, int k) {
  const Eigen::Index half = p.a1.sensor_count();
  const Eigen::Index n = p.a1.parameter_count();
  if (k % 2 != 0) {
    throw InvalidArgument("decentralized selection requires an even budget k");
  }
  if (!(1 <= k / 2 && k / 2 < half)) {
    std::ostringstream msg;
    msg << "per-node budget k/2 = " << k / 2 << " must satisfy 1 <= k/2 < m/2 = " << half;
    throw InvalidArgument(msg.str());
  }
  if (k < n) {
    std::ostringstream msg;
    msg << "total budget k = " << k << " must be at least n = " << n;
    throw InvalidArgument(msg.str());
  }
}

// Centralized objective at a Boolean selection; -inf when rank-deficient.
double lower_bound_or_sentinel(const MeasurementMatrix& full, const SelectionVector& z,
                               OutcomeStatus& status) {
  try {
    return log_det_objective(full, z);
  } catch (const SingularInformation&) {
    status = OutcomeStatus::InfeasibleRounding;
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Centralized: return "centralized";
    case Strategy::NaiveDecentralized: return "decentralized";
    case Strategy::FocusedDiversity: return "fdm";
    case Strategy::LinearPenalty: return "lpm";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  if (name == "centralized" || name == "cen") return Strategy::Centralized;
  if (name == "decentralized" || name == "dec" || name == "naive")
    return Strategy::NaiveDecentralized;
  if (name == "fdm") return Strategy::FocusedDiversity;
  if (name == "lpm") return Strategy::LinearPenalty;
  return std::nullopt;
}

SelectionVector round_simple(const SelectionVector& z, int k) {
  const Eigen::Index m = z.size();
  if (k > m) {
    std::ostringstream msg;
    msg << "cannot select k = " << k << " sensors out of " << m;
    throw InvalidArgument(msg.str());
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // Descending by value; stable keeps the lowest index first on ties.
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return z.entries()(a) > z.entries()(b);
  });
  Eigen::VectorXd rounded = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < k; ++i) rounded(order[static_cast<std::size_t>(i)]) = 1.0;
  return SelectionVector(std::move(rounded), SelectionKind::Boolean, k);
}

SharedVectorSet extract_shared_vectors(const MeasurementMatrix& a1,
                                       const SelectionVector& z1_boolean, int n_shared) {
  const Eigen::Index n = a1.parameter_count();
  if (n_shared < 0 || n_shared > n) {
    std::ostringstream msg;
    msg << "shared vector count " << n_shared << " must lie in [0, " << n << "]";
    throw InvalidArgument(msg.str());
  }
  SharedVectorSet shared;
  shared.dimension = n;
  if (n_shared == 0) return shared;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(information_matrix(a1, z1_boolean));
  if (eig.info() != Eigen::Success) {
    throw SingularInformation("eigendecomposition of the node-1 information matrix failed", 0.0);
  }
  // Eigen returns ascending eigenvalues; walk from the top.
  shared.vectors.reserve(static_cast<std::size_t>(n_shared));
  for (int j = 0; j < n_shared; ++j) {
    const Eigen::Index idx = n - 1 - j;
    double lambda = eig.eigenvalues()(idx);
    if (lambda < 0.0) lambda = 0.0;  // PSD up to roundoff
    Eigen::VectorXd u = eig.eigenvectors().col(idx);
    // Sign convention: the first component of largest magnitude is positive.
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(u(i)) > std::abs(u(lead))) lead = i;
    }
    if (u(lead) < 0.0) u = -u;
    shared.vectors.push_back(lambda * u);
  }
  return shared;
}

Eigen::VectorXd lpm_costs(const MeasurementMatrix& a2, const SharedVectorSet& shared) {
  const Eigen::Index m = a2.sensor_count();
  if (shared.count() > 0 && shared.dimension != a2.parameter_count()) {
    throw DimensionMismatch("shared vectors and A2 disagree on the parameter dimension");
  }
  Eigen::VectorXd costs = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm2 = a2.rows().row(i).squaredNorm();
    if (norm2 == 0.0) {
      std::ostringstream msg;
      msg << "row " << i << " of A2 has zero norm";
      throw ZeroRow(msg.str());
    }
    double total = 0.0;
    for (const auto& g : shared.vectors) {
      total += std::abs(a2.rows().row(i).dot(g));
    }
    costs(i) = total / norm2;
  }
  return costs;
}

StrategyOutcome select_centralized(const MeasurementMatrix& a, int k,
                                   const SolverParams& params) {
  if (k < a.parameter_count()) {
    std::ostringstream msg;
    msg << "centralized budget k = " << k << " must be at least n = " << a.parameter_count();
    throw InvalidArgument(msg.str());
  }
  RelaxedProblem problem(a, k);
  RelaxedSolution sol = solve_relaxed(problem, params);
  SelectionVector rounded = round_simple(sol.z_star, k);

  OutcomeStatus status = OutcomeStatus::Ok;
  const double lower = lower_bound_or_sentinel(a, rounded, status);
  StrategyOutcome outcome{
      Strategy::Centralized,
      sol.z_star,
      std::move(rounded),
      BoundsReport::from_bounds(sol.objective, lower),
      status,
      {{"centralized", sol.outer_stages, sol.newton_iterations}},
  };
  return outcome;
}

namespace {

Partition validated_partition(Partition p, int k) {
  check_decentralized_budget(p, k);
  return p;
}

}  // namespace

TwoNodePipeline::NodeSolution TwoNodePipeline::solve_node(
    const MeasurementMatrix& a, int budget, const SolverParams& params,
    const std::optional<Eigen::MatrixXd>& s, const std::optional<Eigen::VectorXd>& c) {
  RelaxedProblem problem(a, budget, s, c);
  RelaxedSolution sol = solve_relaxed(problem, params);
  SelectionVector rounded = round_simple(sol.z_star, budget);
  return NodeSolution{std::move(sol), std::move(rounded)};
}

TwoNodePipeline::TwoNodePipeline(Partition partition, int k, SolverParams params)
    : partition_(validated_partition(std::move(partition), k)),
      full_(partition_.stacked()),
      k_(k),
      params_(params),
      upper_(solve_relaxed(RelaxedProblem(full_, k), params_)),
      node1_(solve_node(partition_.a1, k / 2, params_)) {
  upper_stats_ = {"centralized", upper_.outer_stages, upper_.newton_iterations};
  node1_stats_ = {"node1", node1_.relaxed.outer_stages, node1_.relaxed.newton_iterations};
}

SharedVectorSet TwoNodePipeline::shared_vectors(int n_shared) const {
  return extract_shared_vectors(partition_.a1, node1_.rounded, n_shared);
}

StrategyOutcome TwoNodePipeline::assemble(Strategy strategy, const NodeSolution& node2,
                                          std::vector<SolveStats> solves) const {
  SelectionVector z_relaxed = stack_selections(node1_.relaxed.z_star, node2.relaxed.z_star);
  SelectionVector z_boolean = stack_selections(node1_.rounded, node2.rounded);
  OutcomeStatus status = OutcomeStatus::Ok;
  const double lower = lower_bound_or_sentinel(full_, z_boolean, status);
  return StrategyOutcome{
      strategy,
      std::move(z_relaxed),
      std::move(z_boolean),
      BoundsReport::from_bounds(upper_.objective, lower),
      status,
      std::move(solves),
  };
}

StrategyOutcome TwoNodePipeline::centralized() const {
  SelectionVector rounded = round_simple(upper_.z_star, k_);
  OutcomeStatus status = OutcomeStatus::Ok;
  const double lower = lower_bound_or_sentinel(full_, rounded, status);
  return StrategyOutcome{
      Strategy::Centralized,
      upper_.z_star,
      std::move(rounded),
      BoundsReport::from_bounds(upper_.objective, lower),
      status,
      {upper_stats_},
  };
}

StrategyOutcome TwoNodePipeline::naive() const {
  NodeSolution node2 = solve_node(partition_.a2, k_ / 2, params_);
  std::vector<SolveStats> solves{
      upper_stats_, node1_stats_,
      {"node2", node2.relaxed.outer_stages, node2.relaxed.newton_iterations}};
  return assemble(Strategy::NaiveDecentralized, node2, std::move(solves));
}

StrategyOutcome TwoNodePipeline::fdm_with(const SharedVectorSet& shared) const {
  std::optional<Eigen::MatrixXd> s;
  if (shared.count() > 0) {
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(shared.dimension, shared.dimension);
    for (const auto& g : shared.vectors) total += g * g.transpose();
    s = std::move(total);
  }
  NodeSolution node2 = solve_node(partition_.a2, k_ / 2, params_, s, std::nullopt);
  std::vector<SolveStats> solves{
      upper_stats_, node1_stats_,
      {"node2_fdm", node2.relaxed.outer_stages, node2.relaxed.newton_iterations}};
  return assemble(Strategy::FocusedDiversity, node2, std::move(solves));
}

StrategyOutcome TwoNodePipeline::lpm_with(const SharedVectorSet& shared) const {
  std::optional<Eigen::VectorXd> c;
  if (shared.count() > 0) {
    c = lpm_costs(partition_.a2, shared);
  }
  NodeSolution node2 = solve_node(partition_.a2, k_ / 2, params_, std::nullopt, c);
  std::vector<SolveStats> solves{
      upper_stats_, node1_stats_,
      {"node2_lpm", node2.relaxed.outer_stages, node2.relaxed.newton_iterations}};
  return assemble(Strategy::LinearPenalty, node2, std::move(solves));
}

StrategyOutcome TwoNodePipeline::fdm(int n_shared) const {
  return fdm_with(shared_vectors(n_shared));
}

StrategyOutcome TwoNodePipeline::lpm(int n_shared) const {
  return lpm_with(shared_vectors(n_shared));
}

StrategyOutcome select_naive(const Partition& p, int k, const SolverParams& params) {
  return TwoNodePipeline(p, k, params).naive();
}

StrategyOutcome select_fdm(const Partition& p, int k, int n_shared,
                           const SolverParams& params) {
  return TwoNodePipeline(p, k, params).fdm(n_shared);
}

StrategyOutcome select_lpm(const Partition& p, int k, int n_shared,
                           const SolverParams& params) {
  return TwoNodePipeline(p, k, params).lpm(n_shared);
}

std::string to_json_string(const StrategyOutcome& outcome) {
  nlohmann::ordered_json j;
  j["strategy"] = strategy_name(outcome.strategy);
  j["budget"] = outcome.z_boolean.budget();
  j["z_relaxed"] = std::vector<double>(
      outcome.z_relaxed.entries().data(),
      outcome.z_relaxed.entries().data() + outcome.z_relaxed.size());
  j["z_boolean"] = std::vector<double>(
      outcome.z_boolean.entries().data(),
      outcome.z_boolean.entries().data() + outcome.z_boolean.size());
  j["upper"] = outcome.bounds.upper;
  j["lower"] = outcome.bounds.lower;
  j["gap"] = outcome.bounds.gap;
  j["relative_gap_percent"] = outcome.bounds.relative_gap_percent;
  j["status"] = outcome.status == OutcomeStatus::Ok ? "ok" : "infeasible_rounding";
  nlohmann::ordered_json solves = nlohmann::ordered_json::array();
  for (const auto& s : outcome.solves) {
    solves.push_back({{"role", s.role}, {"outer", s.outer}, {"newton", s.newton}});
  }
  j["solves"] = std::move(solves);
  return j.dump();
}

}  // namespace sensel
