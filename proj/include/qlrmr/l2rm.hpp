#pragma once

#include <cstddef>
#include <vector>

#include "qlrmr/lrmr.hpp"

namespace qlrmr {

/// Matrix-response data Y_k = sum_i x_ki Theta^(i) + E_k.
///
/// Responses are stored vectorized: column k of `responses()` is vec(Y_k),
/// column-major, length p*q.
class MatrixResponseDataset {
 public:
  MatrixResponseDataset(Matrix x, Matrix responses, std::size_t p, std::size_t q);
  MatrixResponseDataset(Matrix x, const std::vector<Matrix>& responses);

  const Matrix& x() const noexcept { return x_; }
  const Matrix& responses() const noexcept { return responses_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  std::size_t s() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t p() const noexcept { return p_; }
  std::size_t q() const noexcept { return q_; }
  /// Y_k as a p x q matrix.
  Matrix response(std::size_t k) const;

 private:
  Matrix x_;
  Matrix responses_;
  std::size_t p_;
  std::size_t q_;
};

/// Theta^(1), ..., Theta^(s), all p x q.
struct BlockCoefficients {
  std::vector<Matrix> blocks;

  std::size_t s() const noexcept { return blocks.size(); }
  std::size_t p() const { return blocks.empty() ? 0 : static_cast<std::size_t>(blocks[0].rows()); }
  std::size_t q() const { return blocks.empty() ? 0 : static_cast<std::size_t>(blocks[0].cols()); }
  void validate() const;
  /// [Theta^(1), ..., Theta^(s)], p x sq.
  Matrix concatenate() const;
};

/// s x pq matrix whose row i is vec(Theta^(i))^T (column-major vec).
Matrix rearrange(const BlockCoefficients& blocks);
BlockCoefficients inverse_rearrange(const Matrix& rearranged, std::size_t p, std::size_t q);

struct QuantizedMatrixResponseDataset {
  Matrix xdot;  // s x n
  Matrix ydot;  // pq x n, vectorized quantized responses
  std::size_t p = 0;
  std::size_t q = 0;
  QuantConfig config;
};

QuantizedMatrixResponseDataset quantize_matrix_responses(const MatrixResponseDataset& data,
                                                         const QuantConfig& config, Rng& rng,
                                                         DitherMode mode = DitherMode::dithered);

/// Sxx (s x s) and Sxy (s x pq) in rearranged coordinates.
SurrogateCovs l2rm_surrogate_covariances(const QuantizedMatrixResponseDataset& qdata);

/// Applies svt(., tau) to each row of a rearranged matrix viewed as a p x q block.
Matrix blockwise_svt(const Matrix& rearranged, std::size_t p, std::size_t q, double tau);
/// sum_i ||Theta^(i)||_nu for a rearranged matrix.
double block_nuclear_norm(const Matrix& rearranged, std::size_t p, std::size_t q);

struct L2rmEstimate {
  BlockCoefficients blocks;
  EstimateReport report;  // theta_hat holds the rearranged s x pq estimate
};

L2rmEstimate l2rm_regularized(const SurrogateCovs& covs, std::size_t p, std::size_t q,
                              double lambda, const SolverConfig& cfg = {});
L2rmEstimate l2rm_regularized(const QuantizedMatrixResponseDataset& qdata, double lambda,
                              const SolverConfig& cfg = {});

/// scale_c * sqrt((p + q) / n)
double l2rm_lambda_schedule(std::size_t p, std::size_t q, std::size_t n, double scale_c);

}  // namespace qlrmr
