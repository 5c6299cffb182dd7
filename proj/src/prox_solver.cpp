#include "prox_solver.hpp"

#include <cmath>

#include "qlrmr/error.hpp"

namespace qlrmr {

void SolverConfig::validate() const {
  require(max_iters > 0, ErrorKind::invalid_argument, "solver.max_iters must be positive");
  require(rel_tol > 0.0, ErrorKind::invalid_argument, "solver.rel_tol must be positive");
  if (step.kind == StepPolicy::Kind::fixed) {
    require(step.eta >= 0.0, ErrorKind::invalid_argument, "solver.eta must be positive");
  } else {
    require(step.beta > 0.0 && step.beta < 1.0, ErrorKind::invalid_argument,
            "solver.beta must lie in (0, 1)");
    require(step.eta >= 0.0, ErrorKind::invalid_argument, "solver.eta0 must be positive");
  }
}

namespace detail {

namespace {

double inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

}  // namespace

EstimateReport solve_composite(const CompositeProblem& problem, Matrix init,
                               const SolverConfig& cfg, double default_step) {
  cfg.validate();
  const bool backtrack = cfg.step.kind == StepPolicy::Kind::backtracking;
  double eta = cfg.step.eta > 0.0 ? cfg.step.eta : default_step;

  EstimateReport report;
  Matrix x = std::move(init);
  Matrix y = x;
  double t = 1.0;

  auto objective = [&](const Matrix& m) { return problem.smooth(m) + problem.penalty(m); };
  auto residual_at = [&](const Matrix& m) {
    const Matrix step = problem.prox(m - eta * problem.gradient(m), eta);
    return (m - step).norm();
  };

  if (cfg.record_objective) report.objective_history.push_back(objective(x));

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const Matrix g = problem.gradient(y);
    const double fy = backtrack ? problem.smooth(y) : 0.0;
    Matrix x_next;
    for (;;) {
      x_next = problem.prox(y - eta * g, eta);
      if (!backtrack) break;
      const Matrix d = x_next - y;
      const double bound = fy + inner(g, d) + d.squaredNorm() / (2.0 * eta);
      const double fx = problem.smooth(x_next);
      if (fx <= bound + 1e-12 * std::max(1.0, std::abs(fy))) break;
      eta *= cfg.step.beta;
      if (eta < 1e-300) throw Error(ErrorKind::numeric, "step size underflow in backtracking");
    }
    if (!x_next.allFinite()) {
      throw Error(ErrorKind::numeric, "solver iterate diverged (non-finite entries)");
    }

    const double change = (x_next - x).norm() / std::max(1.0, x_next.norm());
    if (cfg.acceleration) {
      if (inner(y - x_next, x_next - x) > 0.0) {
        t = 1.0;
        y = x_next;
      } else {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x_next + ((t - 1.0) / t_next) * (x_next - x);
        t = t_next;
      }
    } else {
      y = x_next;
    }
    x = std::move(x_next);
    if (cfg.record_objective) report.objective_history.push_back(objective(x));

    if (change < cfg.rel_tol) {
      const double r = residual_at(x);
      if (r <= cfg.rel_tol * std::max(1.0, x.norm())) {
        report.converged = true;
        report.stationarity_residual = r;
        ++it;
        break;
      }
    }
  }
  report.iterations = it;
  if (!report.converged) report.stationarity_residual = residual_at(x);
  report.final_objective = objective(x);
  report.step = eta;
  report.theta_hat = std::move(x);
  return report;
}

}  // namespace detail
}  // namespace qlrmr
