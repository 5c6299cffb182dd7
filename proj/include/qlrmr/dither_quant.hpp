#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qlrmr/linalg.hpp"
#include "qlrmr/rng.hpp"

namespace qlrmr {

/// Quantization levels. A level of 0 means that side is passed through.
struct QuantConfig {
  double delta1 = 0.0;  // covariates, triangular dither
  double delta2 = 0.0;  // responses, uniform dither

  void validate() const;
};

enum class DitherKind {
  none,        // plain Q_delta(x), no dither
  uniform,     // U[-delta/2, delta/2]
  triangular,  // sum of two independent U[-delta/2, delta/2]
};

/// Uniform quantizer delta * (floor(a / delta) + 1/2); delta == 0 returns a.
double uniform_quantize(double a, double delta);

std::vector<double> draw_uniform_dither(std::size_t count, double delta, Rng& rng);
std::vector<double> draw_triangular_dither(std::size_t count, double delta, Rng& rng);

/// Result of quantizing one signal. Immutable after construction.
///   error = quantized - (input + dither)   (within [-delta/2, delta/2])
///   noise = quantized - input              (= dither + error)
class QuantRecord {
 public:
  QuantRecord(double delta, DitherKind kind, std::vector<double> quantized,
              std::vector<double> dither, std::vector<double> error,
              std::vector<double> noise);

  double delta() const noexcept { return delta_; }
  DitherKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return quantized_.size(); }
  std::span<const double> quantized() const noexcept { return quantized_; }
  std::span<const double> dither() const noexcept { return dither_; }
  std::span<const double> error() const noexcept { return error_; }
  std::span<const double> noise() const noexcept { return noise_; }

 private:
  double delta_;
  DitherKind kind_;
  std::vector<double> quantized_;
  std::vector<double> dither_;
  std::vector<double> error_;
  std::vector<double> noise_;
};

QuantRecord quantize_with_dither(std::span<const double> input, double delta, DitherKind kind,
                                 Rng& rng);

/// Elementwise dithered quantization of a matrix, without keeping the
/// diagnostic arrays. Dither is drawn in column-major order.
Matrix quantize_matrix(const Matrix& m, double delta, DitherKind kind, Rng& rng);

struct NoiseMoments {
  double mean_noise = 0.0;
  double var_noise = 0.0;
  double second_moment_noise = 0.0;
  double mean_error = 0.0;
  double ks_stat = 0.0;  // sup-distance of the error CDF from U[-delta/2, delta/2]
};

NoiseMoments noise_moment_report(const QuantRecord& record);

/// One-sample Kolmogorov-Smirnov statistic against U[lo, hi].
double ks_statistic_uniform(std::span<const double> samples, double lo, double hi);

/// Asymptotic KS critical value sqrt(-ln(alpha/2) / 2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha);

double sample_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace qlrmr
