#include <cmath>
#include <limits>
#include <string>

#include "doctest.h"
#include "qlrmr/dither_quant.hpp"
#include "qlrmr/error.hpp"
#include "test_util.hpp"

using namespace qlrmr;

namespace {

std::vector<double> gaussian_inputs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

// Direct KS distance for U[lo, hi], written independently of the library helper.
double ks_direct(std::vector<double> s, double lo, double hi) {
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = std::clamp((s[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_SUITE("dither_quant") {
  TEST_CASE("uniform_quantize examples") {
    CHECK(uniform_quantize(0.3, 1.0) == 0.5);
    CHECK(uniform_quantize(-0.2, 1.0) == -0.5);
    CHECK(uniform_quantize(1.26, 0.5) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(uniform_quantize(0.7, 0.0) == 0.7);
  }

  TEST_CASE("cell boundaries use the mathematical floor") {
    CHECK(uniform_quantize(1.0, 0.5) == 1.25);
    CHECK(uniform_quantize(-1.0, 1.0) == -0.5);
    CHECK(uniform_quantize(0.0, 1.0) == 0.5);
    CHECK(uniform_quantize(0.75, 0.25) == 0.875);
    // 0.3 / 0.1 rounds just below 3 in binary, so the cell is [0.2, 0.3).
    CHECK(uniform_quantize(0.3, 0.1) == doctest::Approx(0.25).epsilon(1e-14));
  }

  TEST_CASE("non-finite samples are rejected") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH_AS(uniform_quantize(nan, 1.0), "non-finite sample", Error);
    CHECK_THROWS_AS(uniform_quantize(inf, 1.0), Error);
    CHECK_THROWS_AS(uniform_quantize(1.0, -0.5), Error);
    Rng rng(1);
    const std::vector<double> bad{1.0, nan};
    CHECK_THROWS_AS(quantize_with_dither(bad, 1.0, DitherKind::uniform, rng), Error);
  }

  TEST_CASE("uniform dither moments at 1e6 draws") {
    Rng rng(11);
    const auto d = draw_uniform_dither(1000000, 1.0, rng);
    CHECK(std::abs(testutil::mean(d)) < 0.005);
    CHECK(std::abs(testutil::variance(d) - 1.0 / 12.0) < 0.001);
    for (double v : d) REQUIRE(std::abs(v) <= 0.5);
  }

  TEST_CASE("dither draws are reproducible") {
    Rng a(5), b(5);
    CHECK(draw_uniform_dither(5, 2.0, a) == draw_uniform_dither(5, 2.0, b));
    CHECK(draw_triangular_dither(5, 2.0, a) == draw_triangular_dither(5, 2.0, b));
  }

  TEST_CASE("triangular dither moments and support") {
    Rng rng(12);
    const auto d = draw_triangular_dither(1000000, 1.0, rng);
    CHECK(std::abs(testutil::mean(d)) < 0.005);
    CHECK(std::abs(testutil::variance(d) - 1.0 / 6.0) < 0.002);
    for (double v : d) REQUIRE(std::abs(v) <= 1.0);
  }

  TEST_CASE("dither levels must be positive") {
    Rng rng(1);
    CHECK_THROWS_AS(draw_uniform_dither(3, 0.0, rng), Error);
    CHECK_THROWS_AS(draw_triangular_dither(3, -1.0, rng), Error);
  }

  TEST_CASE("delta zero passes through") {
    Rng rng(2);
    const std::vector<double> x{0.1, -3.5, 7.25};
    for (DitherKind kind : {DitherKind::uniform, DitherKind::triangular, DitherKind::none}) {
      const QuantRecord rec = quantize_with_dither(x, 0.0, kind, rng);
      for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(rec.quantized()[i] == x[i]);
        CHECK(rec.noise()[i] == 0.0);
        CHECK(rec.dither()[i] == 0.0);
        CHECK(rec.error()[i] == 0.0);
      }
      const NoiseMoments m = noise_moment_report(rec);
      CHECK(m.mean_noise == 0.0);
      CHECK(m.var_noise == 0.0);
      CHECK(m.mean_error == 0.0);
      CHECK(m.ks_stat == 0.0);
    }
  }

  TEST_CASE("record invariants: grid, error bound, noise decomposition") {
    Rng rng(3);
    std::vector<double> x = gaussian_inputs(20000, 99);
    for (std::size_t i = 0; i < 100; ++i) x[i] = 0.25 * static_cast<double>(i);  // boundaries
    for (double delta : {0.1, 0.37, 1.0, 3.0}) {
      for (DitherKind kind : {DitherKind::uniform, DitherKind::triangular, DitherKind::none}) {
        const QuantRecord rec = quantize_with_dither(x, delta, kind, rng);
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double q = rec.quantized()[i] / delta - 0.5;
          REQUIRE(std::abs(q - std::round(q)) < 1e-9);
          REQUIRE(std::abs(rec.error()[i]) <= delta / 2.0 * (1.0 + 1e-12));
          REQUIRE(rec.noise()[i] == doctest::Approx(rec.dither()[i] + rec.error()[i]).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("uniform dither whitens the error (KS at 0.01)") {
    const auto x = gaussian_inputs(1000000, 21);
    Rng rng(22);
    const QuantRecord rec = quantize_with_dither(x, 1.0, DitherKind::uniform, rng);
    const NoiseMoments m = noise_moment_report(rec);
    CHECK(m.ks_stat < ks_critical_value(x.size(), 0.01));
    CHECK(std::abs(m.mean_noise) < 0.005);
    CHECK(std::abs(sample_correlation(x, rec.error())) < 0.01);
  }

  TEST_CASE("triangular dither: noise second moment delta^2/4") {
    const auto x = gaussian_inputs(1000000, 23);
    Rng rng(24);
    const QuantRecord rec = quantize_with_dither(x, 1.0, DitherKind::triangular, rng);
    const NoiseMoments m = noise_moment_report(rec);
    CHECK(std::abs(m.second_moment_noise - 0.25) < 0.003);
    CHECK(m.var_noise >= 0.247);
    CHECK(m.var_noise <= 0.253);
    CHECK(m.ks_stat < ks_critical_value(x.size(), 0.01));
    CHECK(std::abs(sample_correlation(x, rec.error())) < 0.01);
  }

  TEST_CASE("triangular noise variance does not depend on the input") {
    const std::size_t n = 1000000;
    Rng in(31);
    std::vector<double> unif(n), constant(n, 0.3);
    for (double& v : unif) v = in.uniform(0.0, 10.0);
    const auto gauss = gaussian_inputs(n, 32);
    const std::vector<const std::vector<double>*> inputs{&gauss, &unif, &constant};
    for (const auto* x : inputs) {
      Rng rng(33);
      const QuantRecord rec = quantize_with_dither(*x, 1.0, DitherKind::triangular, rng);
      std::vector<double> sq(n);
      for (std::size_t i = 0; i < n; ++i) sq[i] = rec.noise()[i] * rec.noise()[i];
      const double tol = 3.0 * std::sqrt(testutil::variance(sq)) / std::sqrt(double(n));
      CHECK(std::abs(testutil::mean(sq) - 0.25) <= tol);
    }
  }

  TEST_CASE("uniform dither error stays uniform for non-Gaussian inputs") {
    const std::size_t n = 1000000;
    std::vector<double> constant(n, 0.3);
    Rng rng(41);
    const QuantRecord rec = quantize_with_dither(constant, 1.0, DitherKind::uniform, rng);
    CHECK(noise_moment_report(rec).ks_stat < ks_critical_value(n, 0.01));
  }

  TEST_CASE("without dither the error is a deterministic function of the input") {
    const std::vector<double> x(1000, 0.3);
    Rng rng(1);
    const QuantRecord rec = quantize_with_dither(x, 1.0, DitherKind::none, rng);
    const NoiseMoments m = noise_moment_report(rec);
    CHECK(m.mean_noise == doctest::Approx(0.2));
    CHECK(m.ks_stat > 0.5);
  }

  TEST_CASE("noise_moment_report rejects empty records") {
    Rng rng(1);
    const std::vector<double> empty;
    const QuantRecord rec = quantize_with_dither(empty, 1.0, DitherKind::uniform, rng);
    CHECK_THROWS_AS(noise_moment_report(rec), Error);
  }

  TEST_CASE("KS statistic matches a direct computation") {
    CHECK(ks_statistic_uniform(std::vector<double>{0.5}, 0.0, 1.0) == doctest::Approx(0.5));
    Rng rng(8);
    std::vector<double> s(501);
    for (double& v : s) v = rng.normal() * 0.3;
    CHECK(ks_statistic_uniform(s, -0.5, 0.5) == doctest::Approx(ks_direct(s, -0.5, 0.5)).epsilon(1e-12));
    CHECK(ks_critical_value(10000, 0.05) == doctest::Approx(1.3581 / 100.0).epsilon(1e-3));
  }

  TEST_CASE("quantize_matrix matches the scalar path in column-major order") {
    Rng a(9), b(9);
    const Matrix m = testutil::random_matrix(4, 3, a);
    Rng qa(10), qb(10);
    const Matrix q = quantize_matrix(m, 0.5, DitherKind::triangular, qa);
    const std::vector<double> flat(m.data(), m.data() + m.size());
    const QuantRecord rec = quantize_with_dither(flat, 0.5, DitherKind::triangular, qb);
    for (Eigen::Index i = 0; i < m.size(); ++i) CHECK(q.data()[i] == rec.quantized()[i]);
  }

  TEST_CASE("QuantConfig validation") {
    CHECK_NOTHROW((QuantConfig{0.0, 0.0}.validate()));
    CHECK_THROWS_AS((QuantConfig{-0.1, 0.0}.validate()), Error);
    CHECK_THROWS_AS((QuantConfig{0.0, std::numeric_limits<double>::infinity()}.validate()), Error);
  }
}
