#include "qlrmr/dither_quant.hpp"

#include <algorithm>
#include <cmath>

#include "qlrmr/error.hpp"

namespace qlrmr {

void QuantConfig::validate() const {
  require(std::isfinite(delta1) && delta1 >= 0.0, ErrorKind::invalid_argument,
          "delta1 must be a nonnegative finite number");
  require(std::isfinite(delta2) && delta2 >= 0.0, ErrorKind::invalid_argument,
          "delta2 must be a nonnegative finite number");
}

double uniform_quantize(double a, double delta) {
  require(std::isfinite(a), ErrorKind::numeric, "non-finite sample");
  require(std::isfinite(delta) && delta >= 0.0, ErrorKind::invalid_argument,
          "quantization level must be nonnegative");
  if (delta == 0.0) return a;
  double cell = std::floor(a / delta);
  double q = delta * (cell + 0.5);
  // a / delta can round across a cell boundary; keep |q - a| <= delta / 2.
  const double half = 0.5 * delta;
  if (q - a > half) {
    cell -= 1.0;
    q = delta * (cell + 0.5);
  } else if (a - q > half) {
    cell += 1.0;
    q = delta * (cell + 0.5);
  }
  return q;
}

std::vector<double> draw_uniform_dither(std::size_t count, double delta, Rng& rng) {
  require(delta > 0.0, ErrorKind::invalid_argument, "dither level must be positive");
  std::vector<double> out(count);
  const double half = 0.5 * delta;
  for (double& v : out) v = rng.uniform(-half, half);
  return out;
}

std::vector<double> draw_triangular_dither(std::size_t count, double delta, Rng& rng) {
  require(delta > 0.0, ErrorKind::invalid_argument, "dither level must be positive");
  std::vector<double> out(count);
  const double half = 0.5 * delta;
  for (double& v : out) {
    const double a = rng.uniform(-half, half);
    v = a + rng.uniform(-half, half);
  }
  return out;
}

QuantRecord::QuantRecord(double delta, DitherKind kind, std::vector<double> quantized,
                         std::vector<double> dither, std::vector<double> error,
                         std::vector<double> noise)
    : delta_(delta),
      kind_(kind),
      quantized_(std::move(quantized)),
      dither_(std::move(dither)),
      error_(std::move(error)),
      noise_(std::move(noise)) {
  require(dither_.size() == quantized_.size() && error_.size() == quantized_.size() &&
              noise_.size() == quantized_.size(),
          ErrorKind::dimension, "QuantRecord arrays must have equal length");
}

namespace {

double draw_one(DitherKind kind, double half, Rng& rng) {
  switch (kind) {
    case DitherKind::none:
      return 0.0;
    case DitherKind::uniform:
      return rng.uniform(-half, half);
    case DitherKind::triangular: {
      const double a = rng.uniform(-half, half);
      return a + rng.uniform(-half, half);
    }
  }
  return 0.0;
}

}  // namespace

QuantRecord quantize_with_dither(std::span<const double> input, double delta, DitherKind kind,
                                 Rng& rng) {
  require(std::isfinite(delta) && delta >= 0.0, ErrorKind::invalid_argument,
          "quantization level must be nonnegative");
  const std::size_t n = input.size();
  for (double x : input) require(std::isfinite(x), ErrorKind::numeric, "non-finite sample");
  std::vector<double> quantized(input.begin(), input.end());
  std::vector<double> dither(n, 0.0), error(n, 0.0), noise(n, 0.0);
  if (delta > 0.0) {
    const double half = 0.5 * delta;
    for (std::size_t i = 0; i < n; ++i) {
      dither[i] = draw_one(kind, half, rng);
      const double shifted = input[i] + dither[i];
      quantized[i] = uniform_quantize(shifted, delta);
      error[i] = quantized[i] - shifted;
      noise[i] = quantized[i] - input[i];
    }
  }
  return QuantRecord(delta, kind, std::move(quantized), std::move(dither), std::move(error),
                     std::move(noise));
}

Matrix quantize_matrix(const Matrix& m, double delta, DitherKind kind, Rng& rng) {
  require(std::isfinite(delta) && delta >= 0.0, ErrorKind::invalid_argument,
          "quantization level must be nonnegative");
  require_finite(m, "quantization input");
  if (delta == 0.0) return m;
  Matrix out(m.rows(), m.cols());
  const double half = 0.5 * delta;
  const double* src = m.data();
  double* dst = out.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    dst[i] = uniform_quantize(src[i] + draw_one(kind, half, rng), delta);
  }
  return out;
}

double ks_statistic_uniform(std::span<const double> samples, double lo, double hi) {
  require(!samples.empty(), ErrorKind::invalid_argument, "KS statistic of an empty sample");
  require(hi > lo, ErrorKind::invalid_argument, "KS reference interval is empty");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = std::clamp((sorted[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  require(n > 0 && alpha > 0.0 && alpha < 1.0, ErrorKind::invalid_argument,
          "ks_critical_value: need n > 0 and alpha in (0, 1)");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

NoiseMoments noise_moment_report(const QuantRecord& record) {
  const std::size_t n = record.size();
  require(n > 0, ErrorKind::invalid_argument, "noise_moment_report: empty record");
  NoiseMoments out;
  if (record.delta() == 0.0) return out;
  double sum = 0.0, sum_sq = 0.0, sum_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += record.noise()[i];
    sum_sq += record.noise()[i] * record.noise()[i];
    sum_err += record.error()[i];
  }
  const double nn = static_cast<double>(n);
  out.mean_noise = sum / nn;
  out.second_moment_noise = sum_sq / nn;
  out.var_noise = n > 1 ? (sum_sq - nn * out.mean_noise * out.mean_noise) / (nn - 1.0) : 0.0;
  out.mean_error = sum_err / nn;
  const double half = 0.5 * record.delta();
  out.ks_stat = ks_statistic_uniform(record.error(), -half, half);
  return out;
}

double sample_correlation(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() > 1, ErrorKind::dimension,
          "sample_correlation needs two equal-length samples");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace qlrmr
