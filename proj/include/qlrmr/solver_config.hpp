#pragma once

#include <string>
#include <vector>

#include "qlrmr/linalg.hpp"

namespace qlrmr {

struct StepPolicy {
  enum class Kind { fixed, backtracking };

  Kind kind = Kind::backtracking;
  double eta = 0.0;  // fixed step; 0 selects 1 / (2 lambda_max(Sxx))
  double beta = 0.5;  // backtracking shrink factor

  static StepPolicy fixed(double eta) { return {Kind::fixed, eta, 0.5}; }
  static StepPolicy backtracking(double beta = 0.5, double eta0 = 0.0) {
    return {Kind::backtracking, eta0, beta};
  }
};

struct SolverConfig {
  int max_iters = 20000;
  double rel_tol = 1e-7;
  StepPolicy step;
  bool acceleration = true;
  bool record_objective = false;

  void validate() const;
};

struct EstimateReport {
  Matrix theta_hat;
  int iterations = 0;
  double final_objective = 0.0;
  bool converged = false;
  double stationarity_residual = 0.0;
  double min_eig_sxx = 0.0;
  double step = 0.0;
  std::vector<std::string> warnings;
  std::vector<double> objective_history;  // filled when record_objective is set
};

}  // namespace qlrmr
