#pragma once

#include <functional>

#include "qlrmr/solver_config.hpp"

namespace qlrmr::detail {

// min f(X) + g(X) with f smooth. prox(Z, eta) is the proximal map of eta * g
// (or the projection onto the feasible set when g is an indicator).
struct CompositeProblem {
  std::function<double(const Matrix&)> smooth;
  std::function<Matrix(const Matrix&)> gradient;
  std::function<Matrix(const Matrix&, double)> prox;
  std::function<double(const Matrix&)> penalty;
};

/// Proximal gradient with optional FISTA momentum (gradient-based restart)
/// and backtracking. Starts from `init`.
EstimateReport solve_composite(const CompositeProblem& problem, Matrix init,
                               const SolverConfig& cfg, double default_step);

}  // namespace qlrmr::detail
