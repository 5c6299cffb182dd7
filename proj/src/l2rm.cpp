#include "qlrmr/l2rm.hpp"

#include <cmath>

#include "prox_solver.hpp"
#include "qlrmr/error.hpp"

namespace qlrmr {

MatrixResponseDataset::MatrixResponseDataset(Matrix x, Matrix responses, std::size_t p,
                                             std::size_t q)
    : x_(std::move(x)), responses_(std::move(responses)), p_(p), q_(q) {
  require(p_ > 0 && q_ > 0, ErrorKind::dimension, "response blocks must be non-empty");
  require(x_.rows() >= 1 && x_.cols() >= 1, ErrorKind::dimension,
          "covariates must be non-empty");
  require(responses_.rows() == static_cast<Eigen::Index>(p_ * q_), ErrorKind::dimension,
          "vectorized responses must have p*q rows");
  require(responses_.cols() == x_.cols(), ErrorKind::dimension,
          "response count differs from covariate count");
}

namespace {

Matrix stack_responses(const std::vector<Matrix>& responses) {
  require(!responses.empty(), ErrorKind::dimension, "no responses");
  const Eigen::Index p = responses[0].rows(), q = responses[0].cols();
  Matrix out(p * q, static_cast<Eigen::Index>(responses.size()));
  for (std::size_t k = 0; k < responses.size(); ++k) {
    require(responses[k].rows() == p && responses[k].cols() == q, ErrorKind::dimension,
            "all responses must share one shape");
    out.col(static_cast<Eigen::Index>(k)) = responses[k].reshaped();
  }
  return out;
}

}  // namespace

MatrixResponseDataset::MatrixResponseDataset(Matrix x, const std::vector<Matrix>& responses)
    : MatrixResponseDataset(std::move(x), stack_responses(responses),
                            static_cast<std::size_t>(responses.at(0).rows()),
                            static_cast<std::size_t>(responses.at(0).cols())) {}

Matrix MatrixResponseDataset::response(std::size_t k) const {
  require(k < n(), ErrorKind::invalid_argument, "response index out of range");
  return responses_.col(static_cast<Eigen::Index>(k))
      .reshaped(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(q_));
}

void BlockCoefficients::validate() const {
  require(!blocks.empty(), ErrorKind::dimension, "need at least one coefficient block");
  for (const Matrix& b : blocks) {
    require(b.rows() == blocks[0].rows() && b.cols() == blocks[0].cols() && b.size() > 0,
            ErrorKind::dimension, "coefficient blocks must share one non-empty shape");
  }
}

Matrix BlockCoefficients::concatenate() const {
  validate();
  const Eigen::Index p = blocks[0].rows(), q = blocks[0].cols();
  Matrix out(p, q * static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t i = 0; i < blocks.size(); ++i)
    out.middleCols(static_cast<Eigen::Index>(i) * q, q) = blocks[i];
  return out;
}

Matrix rearrange(const BlockCoefficients& b) {
  b.validate();
  const Eigen::Index pq = b.blocks[0].size();
  Matrix out(static_cast<Eigen::Index>(b.s()), pq);
  for (std::size_t i = 0; i < b.s(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = b.blocks[i].reshaped().transpose();
  return out;
}

BlockCoefficients inverse_rearrange(const Matrix& rearranged, std::size_t p, std::size_t q) {
  require(p > 0 && q > 0 && rearranged.rows() >= 1 &&
              rearranged.cols() == static_cast<Eigen::Index>(p * q),
          ErrorKind::dimension, "inverse_rearrange: expected s x pq input");
  BlockCoefficients out;
  out.blocks.reserve(static_cast<std::size_t>(rearranged.rows()));
  for (Eigen::Index i = 0; i < rearranged.rows(); ++i) {
    Matrix row = rearranged.row(i).transpose();
    out.blocks.push_back(
        row.reshaped(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)));
  }
  return out;
}

QuantizedMatrixResponseDataset quantize_matrix_responses(const MatrixResponseDataset& data,
                                                         const QuantConfig& config, Rng& rng,
                                                         DitherMode mode) {
  config.validate();
  const bool dither = mode == DitherMode::dithered;
  QuantizedMatrixResponseDataset out;
  out.p = data.p();
  out.q = data.q();
  out.config = config;
  out.xdot = quantize_matrix(data.x(), config.delta1,
                             dither ? DitherKind::triangular : DitherKind::none, rng);
  out.ydot = quantize_matrix(data.responses(), config.delta2,
                             dither ? DitherKind::uniform : DitherKind::none, rng);
  return out;
}

SurrogateCovs l2rm_surrogate_covariances(const QuantizedMatrixResponseDataset& qdata) {
  SurrogateCovs covs = surrogate_covariances(qdata.xdot, qdata.ydot, qdata.config.delta1);
  covs.config = qdata.config;
  return covs;
}

Matrix blockwise_svt(const Matrix& rearranged, std::size_t p, std::size_t q, double tau) {
  require(rearranged.cols() == static_cast<Eigen::Index>(p * q), ErrorKind::dimension,
          "blockwise_svt: expected s x pq input");
  Matrix out(rearranged.rows(), rearranged.cols());
  for (Eigen::Index i = 0; i < rearranged.rows(); ++i) {
    Matrix block = rearranged.row(i).transpose().reshaped(static_cast<Eigen::Index>(p),
                                                          static_cast<Eigen::Index>(q));
    out.row(i) = svt(block, tau).reshaped().transpose();
  }
  return out;
}

double block_nuclear_norm(const Matrix& rearranged, std::size_t p, std::size_t q) {
  require(rearranged.cols() == static_cast<Eigen::Index>(p * q), ErrorKind::dimension,
          "block_nuclear_norm: expected s x pq input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < rearranged.rows(); ++i) {
    Matrix block = rearranged.row(i).transpose().reshaped(static_cast<Eigen::Index>(p),
                                                          static_cast<Eigen::Index>(q));
    total += nuclear_norm(block);
  }
  return total;
}

L2rmEstimate l2rm_regularized(const SurrogateCovs& covs, std::size_t p, std::size_t q,
                              double lambda, const SolverConfig& cfg) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::invalid_argument,
          "l2rm_regularized: lambda must be positive");
  require(covs.sxx.rows() == covs.sxx.cols() && covs.sxx.rows() == covs.sxy.rows() &&
              covs.sxy.cols() == static_cast<Eigen::Index>(p * q),
          ErrorKind::dimension, "l2rm_regularized: covariance shapes do not match p, q");
  require_finite(covs.sxx, "Sxx");
  require_finite(covs.sxy, "Sxy");
  SurrogateCovs sym = covs;
  sym.sxx = symmetrize(covs.sxx);

  detail::CompositeProblem prob;
  prob.smooth = [&sym](const Matrix& t) { return empirical_loss(t, sym); };
  prob.gradient = [&sym](const Matrix& t) { return loss_gradient(t, sym); };
  prob.prox = [p, q, lambda](const Matrix& z, double eta) {
    return blockwise_svt(z, p, q, eta * lambda);
  };
  prob.penalty = [p, q, lambda](const Matrix& t) { return lambda * block_nuclear_norm(t, p, q); };

  const double step = 1.0 / std::max(2.0 * max_eigenvalue(sym.sxx), 1e-8);
  L2rmEstimate out;
  out.report = detail::solve_composite(prob, Matrix::Zero(sym.sxx.rows(), sym.sxy.cols()), cfg,
                                       step);
  out.report.min_eig_sxx = min_eigenvalue(sym.sxx);
  if (out.report.min_eig_sxx < 0.0) {
    out.report.warnings.push_back("surrogate covariance is indefinite; non-convex program");
  }
  out.blocks = inverse_rearrange(out.report.theta_hat, p, q);
  return out;
}

L2rmEstimate l2rm_regularized(const QuantizedMatrixResponseDataset& qdata, double lambda,
                              const SolverConfig& cfg) {
  return l2rm_regularized(l2rm_surrogate_covariances(qdata), qdata.p, qdata.q, lambda, cfg);
}

double l2rm_lambda_schedule(std::size_t p, std::size_t q, std::size_t n, double scale_c) {
  require(p > 0 && q > 0 && n > 0 && scale_c > 0.0, ErrorKind::invalid_argument,
          "l2rm_lambda_schedule: arguments must be positive");
  return scale_c * std::sqrt(static_cast<double>(p + q) / static_cast<double>(n));
}

}  // namespace qlrmr
