#include "qlrmr/lrmr.hpp"

#include <cmath>
#include <sstream>

#include "prox_solver.hpp"
#include "qlrmr/error.hpp"

namespace qlrmr {

Dataset::Dataset(Matrix x, Matrix y) : x_(std::move(x)), y_(std::move(y)) {
  require(x_.cols() >= 1, ErrorKind::dimension, "dataset needs at least one sample");
  require(x_.cols() == y_.cols(), ErrorKind::dimension,
          "covariate and response sample counts differ");
  require(x_.rows() >= 1 && y_.rows() >= 1, ErrorKind::dimension,
          "dataset dimensions must be positive");
}

QuantizedDataset quantize_dataset(const Dataset& data, const QuantConfig& config, Rng& rng,
                                  DitherMode mode) {
  config.validate();
  require_finite(data.x(), "covariates");
  require_finite(data.y(), "responses");
  const bool dither = mode == DitherMode::dithered;
  QuantizedDataset out;
  out.config = config;
  out.xdot = quantize_matrix(data.x(), config.delta1,
                             dither ? DitherKind::triangular : DitherKind::none, rng);
  out.ydot = quantize_matrix(data.y(), config.delta2,
                             dither ? DitherKind::uniform : DitherKind::none, rng);
  return out;
}

SurrogateCovs surrogate_covariances(const Matrix& xdot, const Matrix& ydot, double delta1) {
  require(xdot.cols() >= 1 && xdot.cols() == ydot.cols(), ErrorKind::dimension,
          "surrogate_covariances: sample counts differ or are zero");
  const double inv_n = 1.0 / static_cast<double>(xdot.cols());
  SurrogateCovs covs;
  covs.n = static_cast<std::size_t>(xdot.cols());
  covs.sxx = Matrix::Zero(xdot.rows(), xdot.rows());
  covs.sxx.selfadjointView<Eigen::Lower>().rankUpdate(xdot, inv_n);
  covs.sxx = covs.sxx.selfadjointView<Eigen::Lower>();
  covs.sxx.diagonal().array() -= 0.25 * delta1 * delta1;
  covs.sxy = inv_n * (xdot * ydot.transpose());
  covs.config.delta1 = delta1;
  return covs;
}

SurrogateCovs surrogate_covariances(const QuantizedDataset& qdata) {
  SurrogateCovs covs = surrogate_covariances(qdata.xdot, qdata.ydot, qdata.config.delta1);
  covs.config = qdata.config;
  return covs;
}

namespace {

void check_theta(const Matrix& theta, const SurrogateCovs& covs) {
  if (theta.rows() != covs.sxx.rows() || theta.cols() != covs.sxy.cols()) {
    std::ostringstream msg;
    msg << "theta is " << theta.rows() << "x" << theta.cols() << ", expected "
        << covs.sxx.rows() << "x" << covs.sxy.cols();
    throw Error(ErrorKind::dimension, msg.str());
  }
}

void check_covs(const SurrogateCovs& covs) {
  require(covs.sxx.rows() == covs.sxx.cols() && covs.sxx.rows() == covs.sxy.rows(),
          ErrorKind::dimension, "surrogate covariance shapes are inconsistent");
  require_finite(covs.sxx, "Sxx");
  require_finite(covs.sxy, "Sxy");
}

// 1/L with L = 2 lambda_max(Sxx), the gradient Lipschitz constant.
double default_step(const Matrix& sxx_sym) {
  return 1.0 / std::max(2.0 * max_eigenvalue(sxx_sym), 1e-8);
}

detail::CompositeProblem loss_problem(const SurrogateCovs& covs) {
  detail::CompositeProblem p;
  p.smooth = [&covs](const Matrix& t) { return empirical_loss(t, covs); };
  p.gradient = [&covs](const Matrix& t) { return loss_gradient(t, covs); };
  return p;
}

void note_convexity(EstimateReport& report, double min_eig) {
  report.min_eig_sxx = min_eig;
  if (min_eig < 0.0) {
    report.warnings.push_back(
        "surrogate covariance is indefinite (min eigenvalue " + std::to_string(min_eig) +
        "); the program is non-convex and only stationarity is reported");
  }
}

}  // namespace

double empirical_loss(const Matrix& theta, const SurrogateCovs& covs) {
  check_theta(theta, covs);
  return (theta.array() * (covs.sxx * theta - 2.0 * covs.sxy).array()).sum();
}

Matrix loss_gradient(const Matrix& theta, const SurrogateCovs& covs) {
  check_theta(theta, covs);
  return 2.0 * (covs.sxx * theta - covs.sxy);
}

EstimateReport constrained_lasso(const SurrogateCovs& covs, double radius,
                                 const SolverConfig& cfg) {
  check_covs(covs);
  require(radius > 0.0 && std::isfinite(radius), ErrorKind::invalid_argument,
          "constrained_lasso: radius must be positive");
  SurrogateCovs sym = covs;
  sym.sxx = symmetrize(covs.sxx);
  detail::CompositeProblem p = loss_problem(sym);
  p.prox = [radius](const Matrix& z, double) { return project_nuclear_ball(z, radius); };
  p.penalty = [](const Matrix&) { return 0.0; };
  EstimateReport report = detail::solve_composite(
      p, Matrix::Zero(sym.sxx.rows(), sym.sxy.cols()), cfg, default_step(sym.sxx));
  note_convexity(report, min_eigenvalue(sym.sxx));
  return report;
}

EstimateReport regularized_lasso(const SurrogateCovs& covs, double lambda,
                                 const SolverConfig& cfg) {
  check_covs(covs);
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::invalid_argument,
          "regularized_lasso: lambda must be positive");
  SurrogateCovs sym = covs;
  sym.sxx = symmetrize(covs.sxx);
  detail::CompositeProblem p = loss_problem(sym);
  p.prox = [lambda](const Matrix& z, double eta) { return svt(z, eta * lambda); };
  p.penalty = [lambda](const Matrix& t) { return lambda * nuclear_norm(t); };
  EstimateReport report = detail::solve_composite(
      p, Matrix::Zero(sym.sxx.rows(), sym.sxy.cols()), cfg, default_step(sym.sxx));
  note_convexity(report, min_eigenvalue(sym.sxx));
  return report;
}

EstimateReport ols_baseline(const SurrogateCovs& covs) {
  check_covs(covs);
  const Matrix sxx = symmetrize(covs.sxx);
  const double min_eig = min_eigenvalue(sxx);
  require(min_eig > 1e-10, ErrorKind::numeric,
          "OLS requires nonsingular surrogate covariance");
  Eigen::LLT<Matrix> llt(sxx);
  require(llt.info() == Eigen::Success, ErrorKind::numeric,
          "OLS requires nonsingular surrogate covariance");
  EstimateReport report;
  report.theta_hat = llt.solve(covs.sxy);
  report.iterations = 0;
  report.converged = true;
  report.min_eig_sxx = min_eig;
  report.final_objective = empirical_loss(report.theta_hat, covs);
  return report;
}

double lambda_schedule(std::size_t d1, std::size_t d2, std::size_t n, double scale_c) {
  require(d1 > 0 && d2 > 0 && n > 0 && scale_c > 0.0, ErrorKind::invalid_argument,
          "lambda_schedule: arguments must be positive");
  return scale_c * std::sqrt(static_cast<double>(d1 + d2) / static_cast<double>(n));
}

double prediction_error(const Matrix& theta, const Dataset& data) {
  require(theta.rows() == data.x().rows() && theta.cols() == data.y().rows(),
          ErrorKind::dimension, "prediction_error: theta shape does not match the data");
  const double denom = data.y().norm();
  require(denom > 0.0, ErrorKind::invalid_argument,
          "prediction_error: responses have zero Frobenius norm");
  return (data.y() - theta.transpose() * data.x()).norm() / denom;
}

}  // namespace qlrmr
