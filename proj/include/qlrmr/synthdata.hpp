#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>

#include "qlrmr/l2rm.hpp"
#include "qlrmr/lrmr.hpp"
#include "qlrmr/rng.hpp"

namespace qlrmr {

/// Dimensions and noise for synthetic draws. For matrix responses, (s, p, q)
/// are used instead of (d1, d2) and r is the rank of each block.
struct GenSpec {
  std::size_t d1 = 50;
  std::size_t d2 = 60;
  std::size_t s = 4;
  std::size_t p = 30;
  std::size_t q = 30;
  std::size_t r = 5;
  std::size_t n = 1000;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  void validate_lrmr() const;
  void validate_l2rm() const;
};

enum class CovariateKind { gaussian, bernoulli };

/// Printed noise scalars such as N(0, 0.1 I) are read as variances unless
/// `level_is_std` is set.
double noise_std_from_level(double level, bool level_is_std);

/// Theta1 Theta2 / ||Theta1 Theta2||_F with d1 x r and r x d2 standard Gaussian factors.
Matrix gen_lowrank_theta(std::size_t d1, std::size_t d2, std::size_t r, Rng& rng);
Matrix gen_lowrank_theta(const GenSpec& spec, Rng& rng);

Matrix gen_gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);
/// Entries i.i.d. uniform on {-1, +1}.
Matrix gen_bernoulli_covariates(std::size_t d1, std::size_t n, Rng& rng);

/// x_k i.i.d. from `covariates`, y_k = Theta0^T x_k + eps_k with eps_k ~ N(0, noise_std^2 I).
Dataset gen_lrmr_dataset(const Matrix& theta0, std::size_t n, double noise_std, Rng& rng,
                         CovariateKind covariates = CovariateKind::gaussian);

/// Noise scaled to the signal: eps_k ~ factor * e * N(0, I) with e the mean
/// absolute entry of Theta0^T X. Returns the dataset and e.
std::pair<Dataset, double> gen_lrmr_dataset_signal_relative(const Matrix& theta0, std::size_t n,
                                                            double factor, Rng& rng);

/// Y_k = sum_i x_ki Theta^(i) + E_k, E_k entries i.i.d. N(0, noise_std^2).
MatrixResponseDataset gen_l2rm_dataset(const BlockCoefficients& blocks, std::size_t n,
                                       double noise_std, Rng& rng,
                                       CovariateKind covariates = CovariateKind::gaussian);

/// Each block an independent rank-r draw with unit Frobenius norm.
BlockCoefficients gen_lowrank_blocks(std::size_t s, std::size_t p, std::size_t q, std::size_t r,
                                     Rng& rng);

/// 50 x 60 demo truth: diag(B, ..., B) (ten B's, B = [[0.5, 0.5], [0.4, 0.4]]) in
/// the leading 20 x 20 corner, zero elsewhere.
Matrix make_demo_theta_lrmr();

/// Four 50 x 60 demo blocks built from C = diag(D, ..., D) (five all-ones 2 x 2 D's):
/// 1/2 C and 2/5 C in the top-left corner, then 1/2 C and 2/5 C in the bottom-right.
BlockCoefficients make_demo_blocks_l2rm();

/// Four size x size 0-1 pictures (square, cross, disk, two squares) used as
/// approximately low-rank block coefficients.
BlockCoefficients make_image_blocks_l2rm(std::size_t size);

/// Loads covariates and responses, one sample per column unless
/// `samples_are_rows` is set.
Dataset load_csv_dataset(const std::filesystem::path& path_x, const std::filesystem::path& path_y,
                         bool samples_are_rows = false);

/// Uniformly random column partition into (train, test) with n_test test columns.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, std::size_t n_test, Rng& rng);

/// Column indices of the test part of the partition train_test_split would draw.
std::vector<std::size_t> draw_test_indices(std::size_t n, std::size_t n_test, Rng& rng);

}  // namespace qlrmr
