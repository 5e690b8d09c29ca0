#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "sensel/model.hpp"

namespace sensel {

/// One relaxed selection problem: maximize
///   log det(sum_i z_i a_i a_i^T + S) - c^T z
/// over 1^T z = budget, 0 <= z <= 1. S and c are both optional; the plain
/// problem, the FDM augmentation and the LPM penalty are all instances of
/// this descriptor.
struct RelaxedProblem {
  MeasurementMatrix rows;
  int budget;
  std::optional<Eigen::MatrixXd> augmentation;  // S, n x n PSD
  std::optional<Eigen::VectorXd> linear_cost;   // c >= 0, length m

  RelaxedProblem(MeasurementMatrix rows_in, int budget_in,
                 std::optional<Eigen::MatrixXd> augmentation_in = std::nullopt,
                 std::optional<Eigen::VectorXd> linear_cost_in = std::nullopt);
};

/// Barrier method knobs. Defaults: kappa starts at 1, shrinks by 10x per
/// outer stage, and the loop stops once 2*m*kappa < tolerance * max(1,|f|),
/// which bounds the barrier suboptimality by the left-hand side. The
/// default tolerance keeps that bound below 1e-6 on instances whose
/// relaxed optimum sits at a Boolean vertex.
struct SolverParams {
  double kappa_initial = 1.0;
  double kappa_shrink = 0.1;
  double barrier_tolerance = 1e-7;
  double newton_tolerance = 1e-9;   // on the decrement lambda^2 / 2
  double kkt_tolerance = 1e-6;      // on the projected gradient, inf-norm
  int max_newton_iterations = 50;
  int max_outer_stages = 12;
  double line_search_alpha = 0.01;
  double line_search_beta = 0.5;
  double boundary_fraction = 0.99;  // initial step capped at this fraction of the box distance
};

struct RelaxedSolution {
  SelectionVector z_star;
  double objective;         // f(z*), barrier excluded, penalty included
  int outer_stages;
  int newton_iterations;    // total across stages
  double final_kappa;
  bool converged;
};

/// Optional per-iteration record for diagnostics and tests.
struct SolveTrace {
  struct Step {
    int stage;
    double kappa;
    double psi;
  };
  std::vector<Step> steps;
};

/// Barrier objective psi = f(z) + kappa * sum(log z_i + log(1 - z_i)).
double psi(const RelaxedProblem& p, const Eigen::VectorXd& z, double kappa);

/// Analytic gradient of psi; component i of the log-det part is
/// a_i^T W a_i with W the inverse information matrix.
Eigen::VectorXd grad_psi(const RelaxedProblem& p, const Eigen::VectorXd& z, double kappa);

/// Analytic Hessian of psi; the log-det part is -(A W A^T) o (A W A^T)
/// (Hadamard square), the barrier adds a negative diagonal.
Eigen::MatrixXd hess_psi(const RelaxedProblem& p, const Eigen::VectorXd& z, double kappa);

/// Feasible-start Newton barrier method for the relaxed problem.
/// Starts from z = (budget/m) * 1 and keeps 1^T z = budget at every iterate.
RelaxedSolution solve_relaxed(const RelaxedProblem& p,
                              const SolverParams& params = SolverParams{},
                              SolveTrace* trace = nullptr);

}  // namespace sensel
