#pragma once

#include <cstddef>

#include "qlrmr/dither_quant.hpp"
#include "qlrmr/linalg.hpp"
#include "qlrmr/rng.hpp"
#include "qlrmr/solver_config.hpp"

namespace qlrmr {

/// Vector-response regression data y_k = Theta0^T x_k + eps_k, one sample per column.
class Dataset {
 public:
  Dataset(Matrix x, Matrix y);

  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  std::size_t d1() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t d2() const noexcept { return static_cast<std::size_t>(y_.rows()); }

 private:
  Matrix x_;
  Matrix y_;
};

struct QuantizedDataset {
  Matrix xdot;
  Matrix ydot;
  QuantConfig config;
};

/// Whether quantization adds dither. `undithered` applies Q_delta directly and
/// exists only to demonstrate the resulting error floor.
enum class DitherMode { dithered, undithered };

/// Covariates get triangular dither at delta1, responses uniform dither at
/// delta2. Covariates consume the generator first.
QuantizedDataset quantize_dataset(const Dataset& data, const QuantConfig& config, Rng& rng,
                                  DitherMode mode = DitherMode::dithered);

/// Bias-corrected second moments of quantized data:
///   Sxx = (1/n) sum xdot xdot^T - (delta1^2 / 4) I,   Sxy = (1/n) sum xdot ydot^T.
struct SurrogateCovs {
  Matrix sxx;
  Matrix sxy;
  std::size_t n = 0;
  QuantConfig config;
};

SurrogateCovs surrogate_covariances(const QuantizedDataset& qdata);
SurrogateCovs surrogate_covariances(const Matrix& xdot, const Matrix& ydot, double delta1);

/// <Theta Theta^T, Sxx> - 2 <Theta, Sxy>
double empirical_loss(const Matrix& theta, const SurrogateCovs& covs);
/// 2 Sxx Theta - 2 Sxy
Matrix loss_gradient(const Matrix& theta, const SurrogateCovs& covs);

/// Nuclear-norm constrained least squares by projected gradient.
EstimateReport constrained_lasso(const SurrogateCovs& covs, double radius,
                                 const SolverConfig& cfg = {});

/// Nuclear-norm penalized least squares by proximal gradient.
EstimateReport regularized_lasso(const SurrogateCovs& covs, double lambda,
                                 const SolverConfig& cfg = {});

/// Unpenalized minimizer, Sxx Theta = Sxy.
EstimateReport ols_baseline(const SurrogateCovs& covs);

/// scale_c * sqrt((d1 + d2) / n)
double lambda_schedule(std::size_t d1, std::size_t d2, std::size_t n, double scale_c);

/// ||Y - Theta^T X||_F / ||Y||_F
double prediction_error(const Matrix& theta, const Dataset& data);

}  // namespace qlrmr
