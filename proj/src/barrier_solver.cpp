#include "sensel/barrier_solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <sstream>

#include "sensel/errors.hpp"

namespace sensel {

namespace {

void check_interior(const Eigen::VectorXd& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!(z(i) > 0.0 && z(i) < 1.0)) {
      std::ostringstream msg;
      msg << "z(" << i << ") = " << z(i) << " is not strictly inside (0,1)";
      throw BoundaryViolation(msg.str());
    }
  }
}

bool strictly_interior(const Eigen::VectorXd& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!(z(i) > 0.0 && z(i) < 1.0)) return false;
  }
  return true;
}

Eigen::MatrixXd information_of(const RelaxedProblem& p, const Eigen::VectorXd& z) {
  Eigen::MatrixXd info =
      p.rows.rows().transpose() * z.asDiagonal() * p.rows.rows();
  if (p.augmentation) info += *p.augmentation;
  return ((info + info.transpose()) * 0.5).eval();
}

// Factors the information matrix once; psi, gradient and Hessian all reuse it.
struct Evaluation {
  double psi = 0.0;
  double objective = 0.0;  // f(z): log det part minus linear cost
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

double barrier_sum(const Eigen::VectorXd& z) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    total += std::log(z(i)) + std::log(1.0 - z(i));
  }
  return total;
}

Eigen::LLT<Eigen::MatrixXd> factor_information(const RelaxedProblem& p,
                                               const Eigen::VectorXd& z) {
  Eigen::LLT<Eigen::MatrixXd> llt(information_of(p, z));
  if (llt.info() != Eigen::Success) {
    throw SingularInformation("information matrix factorization failed inside the solver",
                              0.0);
  }
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  double log_det = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    log_det += 2.0 * std::log(l(i, i));
  }
  return log_det;
}

// psi only; used by the line search where gradient and Hessian are not needed.
double psi_value(const RelaxedProblem& p, const Eigen::VectorXd& z, double kappa) {
  auto llt = factor_information(p, z);
  double f = log_det_from_llt(llt);
  if (p.linear_cost) f -= p.linear_cost->dot(z);
  return f + kappa * barrier_sum(z);
}

Evaluation evaluate(const RelaxedProblem& p, const Eigen::VectorXd& z, double kappa,
                    bool with_hessian) {
  const Eigen::Index m = p.rows.sensor_count();
  auto llt = factor_information(p, z);

  Evaluation eval;
  double f = log_det_from_llt(llt);

  // X = L^{-1} A^T, so that A W A^T = X^T X without forming W.
  Eigen::MatrixXd x = p.rows.rows().transpose();
  llt.matrixL().solveInPlace(x);

  eval.grad.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    eval.grad(i) = x.col(i).squaredNorm();  // a_i^T W a_i
  }

  if (with_hessian) {
    Eigen::MatrixXd v = x.transpose() * x;  // A W A^T
    eval.hess = -v.cwiseProduct(v);
  }

  if (p.linear_cost) {
    f -= p.linear_cost->dot(z);
    eval.grad -= *p.linear_cost;
  }
  eval.objective = f;

  double phi = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double zi = z(i);
    phi += std::log(zi) + std::log(1.0 - zi);
    eval.grad(i) += kappa * (1.0 / zi - 1.0 / (1.0 - zi));
    if (with_hessian) {
      eval.hess(i, i) -= kappa * (1.0 / (zi * zi) + 1.0 / ((1.0 - zi) * (1.0 - zi)));
    }
  }
  eval.psi = f + kappa * phi;
  return eval;
}

double projected_gradient_inf_norm(const Eigen::VectorXd& grad) {
  const double mean = grad.mean();
  return (grad.array() - mean).abs().maxCoeff();
}

}  // namespace

RelaxedProblem::RelaxedProblem(MeasurementMatrix rows_in, int budget_in,
                               std::optional<Eigen::MatrixXd> augmentation_in,
                               std::optional<Eigen::VectorXd> linear_cost_in)
    : rows(std::move(rows_in)),
      budget(budget_in),
      augmentation(std::move(augmentation_in)),
      linear_cost(std::move(linear_cost_in)) {
  const Eigen::Index m = rows.sensor_count();
  const Eigen::Index n = rows.parameter_count();
  if (!(1 <= budget && budget < m)) {
    std::ostringstream msg;
    msg << "budget " << budget << " must satisfy 1 <= budget < m with m = " << m;
    throw InvalidArgument(msg.str());
  }
  if (augmentation && (augmentation->rows() != n || augmentation->cols() != n)) {
    throw DimensionMismatch("augmentation must be n x n");
  }
  if (linear_cost) {
    if (linear_cost->size() != m) {
      throw DimensionMismatch("linear cost must have one entry per sensor");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!((*linear_cost)(i) >= 0.0)) {
        throw InvalidArgument("linear cost entries must be nonnegative");
      }
    }
  }
}

double psi(const RelaxedProblem& p, const Eigen::VectorXd& z, double kappa) {
  if (z.size() != p.rows.sensor_count()) {
    throw DimensionMismatch("z dimension does not match the problem");
  }
  check_interior(z);
  return psi_value(p, z, kappa);
}

Eigen::VectorXd grad_psi(const RelaxedProblem& p, const Eigen::VectorXd& z, double kappa) {
  if (z.size() != p.rows.sensor_count()) {
    throw DimensionMismatch("z dimension does not match the problem");
  }
  check_interior(z);
  return evaluate(p, z, kappa, /*with_hessian=*/false).grad;
}

Eigen::MatrixXd hess_psi(const RelaxedProblem& p, const Eigen::VectorXd& z, double kappa) {
  if (z.size() != p.rows.sensor_count()) {
    throw DimensionMismatch("z dimension does not match the problem");
  }
  check_interior(z);
  return evaluate(p, z, kappa, /*with_hessian=*/true).hess;
}

RelaxedSolution solve_relaxed(const RelaxedProblem& p, const SolverParams& params,
                              SolveTrace* trace) {
  const Eigen::Index m = p.rows.sensor_count();
  const double k = static_cast<double>(p.budget);

  // Strictly feasible start on the budget hyperplane.
  Eigen::VectorXd z = Eigen::VectorXd::Constant(m, k / static_cast<double>(m));

  double kappa = params.kappa_initial;
  int outer = 0;
  int newton_total = 0;

  // One Newton inner loop at fixed kappa; returns the objective f at the
  // last evaluated iterate. A -inf decrement_tolerance forces a step
  // attempt even when the predicted gain is noise (used by the polish).
  auto newton_at = [&](double kap, int max_iterations, double decrement_tolerance) -> double {
    double f = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
      Evaluation eval = evaluate(p, z, kap, /*with_hessian=*/true);
      f = eval.objective;
      if (trace) trace->steps.push_back({outer, kap, eval.psi});

      // Newton step on the hyperplane 1^T dz = 0 via block elimination of
      // the KKT system [H 1; 1^T 0]; -H is positive definite here.
      Eigen::LLT<Eigen::MatrixXd> llt(-eval.hess);
      if (llt.info() != Eigen::Success) {
        throw SingularKkt("KKT factorization failed: Hessian not negative definite");
      }
      Eigen::VectorXd u = llt.solve(eval.grad);
      Eigen::VectorXd v = llt.solve(Eigen::VectorXd::Ones(m));
      const double denom = v.sum();
      if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw SingularKkt("KKT system numerically singular");
      }
      const double nu = -u.sum() / denom;
      Eigen::VectorXd dz = u + nu * v;

      const double decrement = eval.grad.dot(dz);  // lambda^2
      if (!std::isfinite(decrement)) {
        throw SingularKkt("Newton decrement is not finite");
      }
      if (0.5 * decrement < decrement_tolerance) break;

      // Cap the step so the trial point stays strictly inside the box.
      double t_max = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (dz(i) > 0.0) t_max = std::min(t_max, (1.0 - z(i)) / dz(i));
        else if (dz(i) < 0.0) t_max = std::min(t_max, -z(i) / dz(i));
      }
      double t = std::min(1.0, params.boundary_fraction * t_max);

      // Backtracking line search on the ascent condition. Once the
      // predicted gain drops below the floating-point resolution of psi,
      // the Armijo test only measures noise; take the capped Newton step
      // directly (quadratic convergence region).
      const bool below_resolution =
          decrement < 1e-12 * std::max(1.0, std::abs(eval.psi));
      bool stepped = false;
      while (t > 1e-18) {
        Eigen::VectorXd z_trial = z + t * dz;
        if (strictly_interior(z_trial)) {
          bool acceptable = false;
          try {
            const double psi_trial = psi_value(p, z_trial, kap);
            acceptable =
                below_resolution ||
                psi_trial >= eval.psi + params.line_search_alpha * t * decrement;
          } catch (const SingularInformation&) {
            acceptable = false;  // conditioning blow-up; shrink further
          }
          if (acceptable) {
            z = std::move(z_trial);
            stepped = true;
            break;
          }
        }
        t *= params.line_search_beta;
      }
      ++newton_total;
      if (!stepped) break;  // ascent exhausted at floating-point resolution
    }
    return f;
  };

  bool kappa_certified = false;
  for (int stage = 0; stage < params.max_outer_stages; ++stage) {
    ++outer;
    const double f = newton_at(kappa, params.max_newton_iterations, params.newton_tolerance);
    if (2.0 * static_cast<double>(m) * kappa <
        params.barrier_tolerance * std::max(1.0, std::abs(f))) {
      kappa_certified = true;
      break;
    }
    if (stage + 1 < params.max_outer_stages) kappa *= params.kappa_shrink;
  }

  // Polish at the final kappa until the projected gradient meets the KKT
  // tolerance; normally zero extra iterations are needed. Near the
  // floating-point floor the Newton decrement is pure noise, so the polish
  // is kept monotone on the gradient residual instead: a step that does
  // not reduce it is rolled back.
  Evaluation final_eval = evaluate(p, z, kappa, /*with_hessian=*/false);
  double residual = projected_gradient_inf_norm(final_eval.grad);
  for (int polish = 0; residual >= params.kkt_tolerance && polish < 20; ++polish) {
    Eigen::VectorXd snapshot = z;
    newton_at(kappa, 1, -std::numeric_limits<double>::infinity());
    Evaluation candidate = evaluate(p, z, kappa, /*with_hessian=*/false);
    const double candidate_residual = projected_gradient_inf_norm(candidate.grad);
    if (candidate_residual < residual) {
      residual = candidate_residual;
      final_eval = std::move(candidate);
    } else {
      z = std::move(snapshot);
      break;
    }
  }

  const bool stationary = residual < params.kkt_tolerance;
  if (!stationary || !kappa_certified) {
    std::ostringstream msg;
    msg << "barrier solver did not converge: projected gradient " << residual << ", kappa "
        << kappa << (kappa_certified ? "" : " (stage budget exhausted)");
    throw NonConvergence(msg.str());
  }

  return RelaxedSolution{
      SelectionVector(z, SelectionKind::Relaxed, p.budget),
      final_eval.objective,
      outer,
      newton_total,
      kappa,
      true,
  };
}

}  // namespace sensel
