#include "qlrmr/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qlrmr/csv.hpp"
#include "qlrmr/error.hpp"

namespace qlrmr {

void GenSpec::validate_lrmr() const {
  require(d1 > 0 && d2 > 0 && n > 0 && r > 0, ErrorKind::config,
          "gen: d1, d2, r and n must be positive");
  require(r <= std::min(d1, d2), ErrorKind::config, "gen: r must not exceed min(d1, d2)");
  require(noise_std >= 0.0, ErrorKind::config, "gen: noise must be nonnegative");
}

void GenSpec::validate_l2rm() const {
  require(s > 0 && p > 0 && q > 0 && n > 0 && r > 0, ErrorKind::config,
          "gen: s, p, q, r and n must be positive");
  require(r <= std::min(p, q), ErrorKind::config, "gen: block rank must not exceed min(p, q)");
  require(noise_std >= 0.0, ErrorKind::config, "gen: noise must be nonnegative");
}

double noise_std_from_level(double level, bool level_is_std) {
  require(level >= 0.0, ErrorKind::config, "noise level must be nonnegative");
  return level_is_std ? level : std::sqrt(level);
}

Matrix gen_gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  double* d = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) d[i] = rng.normal();
  return m;
}

Matrix gen_bernoulli_covariates(std::size_t d1, std::size_t n, Rng& rng) {
  Matrix m(static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(n));
  double* d = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) d[i] = rng.rademacher();
  return m;
}

Matrix gen_lowrank_theta(std::size_t d1, std::size_t d2, std::size_t r, Rng& rng) {
  require(d1 > 0 && d2 > 0 && r > 0 && r <= std::min(d1, d2), ErrorKind::invalid_argument,
          "gen_lowrank_theta: need 0 < r <= min(d1, d2)");
  for (int attempt = 0; attempt < 2; ++attempt) {
    const Matrix left = gen_gaussian_matrix(d1, r, rng);
    const Matrix right = gen_gaussian_matrix(r, d2, rng);
    Matrix theta = left * right;
    const double norm = theta.norm();
    if (norm > 0.0) return theta / norm;
  }
  throw Error(ErrorKind::numeric, "gen_lowrank_theta: drew a zero product twice");
}

Matrix gen_lowrank_theta(const GenSpec& spec, Rng& rng) {
  return gen_lowrank_theta(spec.d1, spec.d2, spec.r, rng);
}

namespace {

Matrix draw_covariates(std::size_t d, std::size_t n, Rng& rng, CovariateKind kind) {
  return kind == CovariateKind::bernoulli ? gen_bernoulli_covariates(d, n, rng)
                                          : gen_gaussian_matrix(d, n, rng);
}

}  // namespace

Dataset gen_lrmr_dataset(const Matrix& theta0, std::size_t n, double noise_std, Rng& rng,
                         CovariateKind covariates) {
  require(noise_std >= 0.0, ErrorKind::invalid_argument, "noise_std must be nonnegative");
  require(n > 0, ErrorKind::invalid_argument, "sample count must be positive");
  Matrix x = draw_covariates(static_cast<std::size_t>(theta0.rows()), n, rng, covariates);
  Matrix y = theta0.transpose() * x;
  if (noise_std > 0.0) y += noise_std * gen_gaussian_matrix(static_cast<std::size_t>(y.rows()), n, rng);
  return Dataset(std::move(x), std::move(y));
}

std::pair<Dataset, double> gen_lrmr_dataset_signal_relative(const Matrix& theta0, std::size_t n,
                                                            double factor, Rng& rng) {
  require(factor >= 0.0, ErrorKind::invalid_argument, "noise factor must be nonnegative");
  Matrix x = gen_gaussian_matrix(static_cast<std::size_t>(theta0.rows()), n, rng);
  Matrix y = theta0.transpose() * x;
  const double e = y.cwiseAbs().mean();
  if (factor > 0.0) {
    y += (factor * e) * gen_gaussian_matrix(static_cast<std::size_t>(y.rows()), n, rng);
  }
  return {Dataset(std::move(x), std::move(y)), e};
}

MatrixResponseDataset gen_l2rm_dataset(const BlockCoefficients& blocks, std::size_t n,
                                       double noise_std, Rng& rng, CovariateKind covariates) {
  require(noise_std >= 0.0, ErrorKind::invalid_argument, "noise_std must be nonnegative");
  require(n > 0, ErrorKind::invalid_argument, "sample count must be positive");
  const Matrix tilde = rearrange(blocks);
  Matrix x = draw_covariates(blocks.s(), n, rng, covariates);
  Matrix y = tilde.transpose() * x;
  if (noise_std > 0.0) y += noise_std * gen_gaussian_matrix(static_cast<std::size_t>(y.rows()), n, rng);
  return MatrixResponseDataset(std::move(x), std::move(y), blocks.p(), blocks.q());
}

BlockCoefficients gen_lowrank_blocks(std::size_t s, std::size_t p, std::size_t q, std::size_t r,
                                     Rng& rng) {
  require(s > 0, ErrorKind::invalid_argument, "need at least one block");
  BlockCoefficients out;
  for (std::size_t i = 0; i < s; ++i) out.blocks.push_back(gen_lowrank_theta(p, q, r, rng));
  return out;
}

Matrix make_demo_theta_lrmr() {
  Matrix theta = Matrix::Zero(50, 60);
  for (Eigen::Index b = 0; b < 10; ++b) {
    theta.block(2 * b, 2 * b, 2, 2) << 0.5, 0.5, 0.4, 0.4;
  }
  return theta;
}

BlockCoefficients make_demo_blocks_l2rm() {
  Matrix c = Matrix::Zero(10, 10);
  for (Eigen::Index b = 0; b < 5; ++b) c.block(2 * b, 2 * b, 2, 2).setOnes();
  BlockCoefficients out;
  out.blocks.assign(4, Matrix::Zero(50, 60));
  out.blocks[0].topLeftCorner(10, 10) = 0.5 * c;
  out.blocks[1].topLeftCorner(10, 10) = 0.4 * c;
  out.blocks[2].bottomRightCorner(10, 10) = 0.5 * c;
  out.blocks[3].bottomRightCorner(10, 10) = 0.4 * c;
  return out;
}

BlockCoefficients make_image_blocks_l2rm(std::size_t size) {
  require(size >= 8, ErrorKind::invalid_argument, "image blocks need size >= 8");
  const auto m = static_cast<Eigen::Index>(size);
  BlockCoefficients out;
  out.blocks.assign(4, Matrix::Zero(m, m));
  // Square.
  out.blocks[0].block(m / 4, m / 4, m / 2, m / 2).setOnes();
  // Cross.
  out.blocks[1].block(m * 3 / 8, m / 8, m / 4, m * 3 / 4).setOnes();
  out.blocks[1].block(m / 8, m * 3 / 8, m * 3 / 4, m / 4).setOnes();
  // Disk.
  const double c = 0.5 * static_cast<double>(m - 1);
  const double radius = static_cast<double>(m) / 3.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
      if (di * di + dj * dj <= radius * radius) out.blocks[2](i, j) = 1.0;
    }
  // Two squares on the diagonal.
  out.blocks[3].block(m / 8, m / 8, m / 4, m / 4).setOnes();
  out.blocks[3].block(m * 5 / 8, m * 5 / 8, m / 4, m / 4).setOnes();
  return out;
}

Dataset load_csv_dataset(const std::filesystem::path& path_x, const std::filesystem::path& path_y,
                         bool samples_are_rows) {
  Matrix x = read_csv_matrix(path_x);
  Matrix y = read_csv_matrix(path_y);
  if (samples_are_rows) {
    x.transposeInPlace();
    y.transposeInPlace();
  }
  if (x.cols() != y.cols()) {
    throw Error(ErrorKind::parse, "sample count mismatch: " + path_x.string() + " has " +
                                      std::to_string(x.cols()) + ", " + path_y.string() +
                                      " has " + std::to_string(y.cols()));
  }
  return Dataset(std::move(x), std::move(y));
}

std::vector<std::size_t> draw_test_indices(std::size_t n, std::size_t n_test, Rng& rng) {
  require(n_test > 0 && n_test < n, ErrorKind::invalid_argument,
          "train_test_split: need 0 < n_test < n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first n_test slots end up a uniform random subset.
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n_test);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, std::size_t n_test, Rng& rng) {
  const std::size_t n = data.n();
  const std::vector<std::size_t> test = draw_test_indices(n, n_test, rng);
  std::vector<bool> is_test(n, false);
  for (std::size_t k : test) is_test[k] = true;
  Matrix xtr(data.x().rows(), static_cast<Eigen::Index>(n - n_test));
  Matrix ytr(data.y().rows(), xtr.cols());
  Matrix xte(data.x().rows(), static_cast<Eigen::Index>(n_test));
  Matrix yte(data.y().rows(), xte.cols());
  Eigen::Index a = 0, b = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    if (is_test[k]) {
      xte.col(b) = data.x().col(col);
      yte.col(b++) = data.y().col(col);
    } else {
      xtr.col(a) = data.x().col(col);
      ytr.col(a++) = data.y().col(col);
    }
  }
  return {Dataset(std::move(xtr), std::move(ytr)), Dataset(std::move(xte), std::move(yte))};
}

}  // namespace qlrmr
