#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "qlrmr/error.hpp"
#include "qlrmr/lrmr.hpp"
#include "qlrmr/synthdata.hpp"
#include "test_util.hpp"

using namespace qlrmr;
using testutil::random_matrix;

namespace {

SurrogateCovs make_covs(Matrix sxx, Matrix sxy) {
  SurrogateCovs c;
  c.sxx = std::move(sxx);
  c.sxy = std::move(sxy);
  c.n = 1;
  return c;
}

double composite(const Matrix& theta, const SurrogateCovs& c, double lambda) {
  return empirical_loss(theta, c) + lambda * nuclear_norm(theta);
}

SolverConfig tight() {
  SolverConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.max_iters = 200000;
  return cfg;
}

}  // namespace

TEST_SUITE("lrmr") {
  TEST_CASE("dataset shape checks") {
    CHECK_THROWS_AS(Dataset(Matrix::Zero(3, 4), Matrix::Zero(2, 5)), Error);
    CHECK_THROWS_AS(Dataset(Matrix::Zero(3, 0), Matrix::Zero(2, 0)), Error);
    const Dataset d(Matrix::Zero(3, 4), Matrix::Zero(2, 4));
    CHECK(d.n() == 4);
    CHECK(d.d1() == 3);
    CHECK(d.d2() == 2);
  }

  TEST_CASE("quantize_dataset pass-through and grid membership") {
    Rng rng(1);
    const Dataset data(random_matrix(4, 30, rng), random_matrix(3, 30, rng));
    Rng q1(2);
    const QuantizedDataset same = quantize_dataset(data, {0.0, 0.0}, q1);
    CHECK(same.xdot == data.x());
    CHECK(same.ydot == data.y());
    Rng q2(3);
    const QuantizedDataset half = quantize_dataset(data, {0.0, 1.0}, q2);
    CHECK(half.xdot == data.x());
    for (Eigen::Index i = 0; i < half.ydot.size(); ++i) {
      const double k = half.ydot.data()[i] - 0.5;
      REQUIRE(std::abs(k - std::round(k)) < 1e-12);
    }
  }

  TEST_CASE("quantize_dataset rejects non-finite data") {
    Matrix x = Matrix::Ones(2, 3);
    x(1, 1) = std::numeric_limits<double>::infinity();
    const Dataset data(x, Matrix::Ones(1, 3));
    Rng rng(1);
    CHECK_THROWS_AS(quantize_dataset(data, {0.5, 0.5}, rng), Error);
  }

  TEST_CASE("dithered responses are unbiased over re-quantizations") {
    Rng rng(4);
    const Dataset data(random_matrix(2, 5, rng), random_matrix(2, 5, rng));
    const int reps = 2000;
    Matrix sum = Matrix::Zero(2, 5), sq = Matrix::Zero(2, 5);
    for (int t = 0; t < reps; ++t) {
      Rng q(derive_seed(40, {static_cast<std::uint64_t>(t)}));
      const QuantizedDataset qd = quantize_dataset(data, {0.0, 1.0}, q);
      sum += qd.ydot;
      sq += qd.ydot.cwiseProduct(qd.ydot);
    }
    const Matrix mean = sum / reps;
    const Matrix sd = ((sq / reps - mean.cwiseProduct(mean)) * reps / (reps - 1.0)).cwiseSqrt();
    for (Eigen::Index i = 0; i < mean.size(); ++i)
      CHECK(std::abs(mean.data()[i] - data.y().data()[i]) <= 3.0 * sd.data()[i] / std::sqrt(reps));
  }

  TEST_CASE("surrogate covariance examples") {
    Matrix x = Matrix::Zero(3, 1), y = Matrix::Zero(3, 1);
    x(0, 0) = 1.0;
    y(1, 0) = 1.0;
    const SurrogateCovs c = surrogate_covariances(x, y, 0.0);
    CHECK(c.sxx == x * x.transpose());
    CHECK(c.sxy == x * y.transpose());
    const SurrogateCovs z = surrogate_covariances(Matrix::Zero(3, 4), Matrix::Zero(2, 4), 2.0);
    CHECK(z.sxx == -Matrix::Identity(3, 3));
    CHECK(z.n == 4);
  }

  TEST_CASE("surrogate Sxx concentrates around I under covariate quantization") {
    Rng rng(5);
    const Matrix x = random_matrix(5, 100000, rng);
    const Dataset data(x, Matrix::Zero(1, 100000));
    Rng q(6);
    const SurrogateCovs c = surrogate_covariances(quantize_dataset(data, {0.5, 0.0}, q));
    CHECK(operator_norm(c.sxx - Matrix::Identity(5, 5)) <= 0.06);
    CHECK((c.sxx - c.sxx.transpose()).norm() <= 1e-12);
  }

  TEST_CASE("surrogate covariances are unbiased over 2000 draws") {
    const int reps = 2000;
    Rng truth_rng(7);
    const Matrix theta0 = random_matrix(5, 4, truth_rng);
    Matrix sxx_sum = Matrix::Zero(5, 5), sxx_sq = Matrix::Zero(5, 5);
    Matrix sxy_sum = Matrix::Zero(5, 4), sxy_sq = Matrix::Zero(5, 4);
    for (int t = 0; t < reps; ++t) {
      Rng rng(derive_seed(70, {static_cast<std::uint64_t>(t)}));
      const Dataset data = gen_lrmr_dataset(theta0, 100, 0.3, rng);
      const SurrogateCovs c = surrogate_covariances(quantize_dataset(data, {0.5, 0.5}, rng));
      sxx_sum += c.sxx;
      sxx_sq += c.sxx.cwiseProduct(c.sxx);
      sxy_sum += c.sxy;
      sxy_sq += c.sxy.cwiseProduct(c.sxy);
    }
    auto check_unbiased = [&](const Matrix& sum, const Matrix& sq, const Matrix& target) {
      const Matrix mean = sum / reps;
      const Matrix var = (sq / reps - mean.cwiseProduct(mean)) * reps / (reps - 1.0);
      for (Eigen::Index i = 0; i < mean.size(); ++i)
        CHECK(std::abs(mean.data()[i] - target.data()[i]) <=
              3.0 * std::sqrt(var.data()[i]) / std::sqrt(reps));
    };
    check_unbiased(sxx_sum, sxx_sq, Matrix::Identity(5, 5));
    check_unbiased(sxy_sum, sxy_sq, theta0);
  }

  TEST_CASE("loss and gradient examples") {
    Rng rng(8);
    const Matrix a = random_matrix(4, 4, rng);
    const SurrogateCovs c = make_covs(a * a.transpose(), random_matrix(4, 3, rng));
    const Matrix zero = Matrix::Zero(4, 3);
    CHECK(empirical_loss(zero, c) == 0.0);
    CHECK(loss_gradient(zero, c) == -2.0 * c.sxy);
    const Matrix theta = random_matrix(4, 3, rng);
    const SurrogateCovs id = make_covs(Matrix::Identity(4, 4), Matrix::Zero(4, 3));
    CHECK(empirical_loss(theta, id) == doctest::Approx(theta.squaredNorm()));
    CHECK_THROWS_AS(loss_gradient(Matrix::Zero(3, 3), c), Error);
    CHECK_THROWS_AS(empirical_loss(Matrix::Zero(4, 2), c), Error);
  }

  TEST_CASE("gradient matches central differences") {
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
      const Matrix a = random_matrix(6, 6, rng);
      const SurrogateCovs c = make_covs(testutil::random_spd(6, rng) + a - a.transpose(),
                                        random_matrix(6, 5, rng));
      const Matrix theta = random_matrix(6, 5, rng);
      const Matrix g = loss_gradient(theta, make_covs(symmetrize(c.sxx), c.sxy));
      const Matrix fd = oracle::fd_gradient(theta, c.sxx, c.sxy, 1e-5);
      for (Eigen::Index i = 0; i < g.size(); ++i)
        REQUIRE(std::abs(g.data()[i] - fd.data()[i]) <=
                1e-4 * std::max(1.0, std::abs(fd.data()[i])));
    }
  }

  TEST_CASE("lambda_schedule") {
    CHECK(lambda_schedule(50, 60, 1100, std::sqrt(10.0)) == doctest::Approx(1.0));
    CHECK(lambda_schedule(50, 60, 4000, 2.0) == doctest::Approx(0.5 * lambda_schedule(50, 60, 1000, 2.0)));
    CHECK_THROWS_AS(lambda_schedule(50, 60, 0, 1.0), Error);
  }

  TEST_CASE("regularized lasso: zero threshold") {
    Rng rng(10);
    for (int t = 0; t < 100; ++t) {
      const SurrogateCovs c = make_covs(testutil::random_spd(5, rng), random_matrix(5, 4, rng));
      const double lambda = 2.0 * operator_norm(c.sxy) * (1.0 + rng.uniform01());
      const EstimateReport r = regularized_lasso(c, lambda);
      REQUIRE(r.theta_hat.norm() <= 1e-10);
      REQUIRE(r.converged);
    }
  }

  TEST_CASE("regularized lasso with identity Sxx is one SVT step") {
    Rng rng(11);
    const SurrogateCovs c = make_covs(Matrix::Identity(6, 6), random_matrix(6, 5, rng));
    const double lambda = 0.8;
    const EstimateReport r = regularized_lasso(c, lambda);
    CHECK(r.converged);
    CHECK((r.theta_hat - oracle::svt(c.sxy, lambda / 2.0)).norm() <= 1e-6);
  }

  TEST_CASE("regularized lasso agrees with a long-run oracle") {
    Rng rng(12);
    for (int t = 0; t < 3; ++t) {
      const SurrogateCovs c = make_covs(testutil::random_spd(8, rng, 0.05), random_matrix(8, 6, rng));
      const double lambda = 0.5;
      const EstimateReport r = regularized_lasso(c, lambda);
      const Matrix ref = oracle::long_run_regularized(c.sxx, c.sxy, lambda, 100000);
      CHECK(r.converged);
      CHECK(composite(r.theta_hat, c, lambda) <= composite(ref, c, lambda) + 1e-6);
      CHECK(std::abs(composite(r.theta_hat, c, lambda) - composite(ref, c, lambda)) <= 1e-6);
    }
  }

  TEST_CASE("regularized lasso stationarity at exit") {
    Rng rng(13);
    for (bool accel : {true, false}) {
      SolverConfig cfg;
      cfg.acceleration = accel;
      const SurrogateCovs c = make_covs(testutil::random_spd(10, rng), random_matrix(10, 7, rng));
      const double lambda = 0.3;
      const EstimateReport r = regularized_lasso(c, lambda, cfg);
      REQUIRE(r.converged);
      CHECK(r.iterations <= cfg.max_iters);
      const Matrix g = loss_gradient(r.theta_hat, c);
      const double res = (r.theta_hat - svt(r.theta_hat - r.step * g, r.step * lambda)).norm();
      CHECK(res <= cfg.rel_tol * std::max(1.0, r.theta_hat.norm()));
      CHECK(r.stationarity_residual == doctest::Approx(res).epsilon(1e-6));
    }
  }

  TEST_CASE("non-accelerated backtracking decreases the objective monotonically") {
    Rng rng(14);
    for (int t = 0; t < 10; ++t) {
      SolverConfig cfg;
      cfg.acceleration = false;
      cfg.record_objective = true;
      cfg.step = StepPolicy::backtracking(0.5, 10.0);  // start too long so backtracking engages
      const SurrogateCovs c = make_covs(testutil::random_spd(7, rng, 0.0), random_matrix(7, 5, rng));
      const EstimateReport r = regularized_lasso(c, 0.2, cfg);
      for (std::size_t k = 1; k < r.objective_history.size(); ++k)
        REQUIRE(r.objective_history[k] <= r.objective_history[k - 1] + 1e-12);
    }
  }

  TEST_CASE("fixed step mode converges to the same point") {
    Rng rng(15);
    const SurrogateCovs c = make_covs(testutil::random_spd(6, rng), random_matrix(6, 4, rng));
    SolverConfig fixed = tight();
    fixed.step = StepPolicy::fixed(1.0 / oracle::lipschitz(c.sxx));
    const EstimateReport a = regularized_lasso(c, 0.3, fixed);
    const EstimateReport b = regularized_lasso(c, 0.3, tight());
    CHECK(a.converged);
    CHECK((a.theta_hat - b.theta_hat).norm() < 1e-6);
  }

  TEST_CASE("indefinite Sxx: warning and reported eigenvalue") {
    Rng rng(16);
    const Matrix sxx = testutil::random_spd(4, rng) - 2.0 * Matrix::Identity(4, 4);
    const SurrogateCovs c = make_covs(sxx, random_matrix(4, 3, rng));
    SolverConfig cfg;
    cfg.max_iters = 50;
    const EstimateReport r = constrained_lasso(c, 1.0, cfg);
    CHECK(r.min_eig_sxx < 0.0);
    CHECK_FALSE(r.warnings.empty());
    CHECK(nuclear_norm(r.theta_hat) <= 1.0 + 1e-6);
  }

  TEST_CASE("constrained lasso: zero and inactive-constraint cases") {
    Rng rng(17);
    const Matrix sxx = testutil::random_spd(5, rng);
    const EstimateReport zero = constrained_lasso(make_covs(sxx, Matrix::Zero(5, 3)), 1.0);
    CHECK(zero.theta_hat.norm() == 0.0);
    const Matrix sxy = random_matrix(5, 3, rng);
    const Matrix closed = sxx.llt().solve(sxy);
    const EstimateReport r =
        constrained_lasso(make_covs(sxx, sxy), nuclear_norm(closed) * 1.5, tight());
    CHECK((r.theta_hat - closed).norm() <= 1e-4);
  }

  TEST_CASE("constrained lasso agrees with a long-run projected-gradient oracle") {
    Rng rng(18);
    const SurrogateCovs c = make_covs(testutil::random_spd(5, rng), 3.0 * random_matrix(5, 4, rng));
    const EstimateReport r = constrained_lasso(c, 1.0);
    const Matrix ref = oracle::long_run_constrained(c.sxx, c.sxy, 1.0, 100000);
    CHECK(r.converged);
    CHECK(empirical_loss(r.theta_hat, c) <= empirical_loss(ref, c) + 1e-6);
    CHECK(nuclear_norm(r.theta_hat) <= 1.0 + 1e-6);
    const Matrix g = loss_gradient(r.theta_hat, c);
    const double res = (r.theta_hat - project_nuclear_ball(r.theta_hat - r.step * g, 1.0)).norm();
    CHECK(res <= SolverConfig{}.rel_tol * std::max(1.0, r.theta_hat.norm()));
  }

  TEST_CASE("constrained lasso stays feasible at any iteration cap") {
    Rng rng(19);
    for (int cap : {1, 2, 5, 20}) {
      SolverConfig cfg;
      cfg.max_iters = cap;
      const SurrogateCovs c = make_covs(testutil::random_spd(6, rng), 5.0 * random_matrix(6, 6, rng));
      const EstimateReport r = constrained_lasso(c, 0.7, cfg);
      CHECK(nuclear_norm(r.theta_hat) <= 0.7 + 1e-6);
      CHECK(r.iterations <= cap);
    }
  }

  TEST_CASE("estimator argument checks") {
    const SurrogateCovs c = make_covs(Matrix::Identity(3, 3), Matrix::Ones(3, 2));
    CHECK_THROWS_AS(regularized_lasso(c, 0.0), Error);
    CHECK_THROWS_AS(constrained_lasso(c, -1.0), Error);
    CHECK_THROWS_AS(regularized_lasso(make_covs(Matrix::Identity(3, 3), Matrix::Ones(2, 2)), 1.0), Error);
    SolverConfig bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(regularized_lasso(c, 1.0, bad), Error);
    bad = {};
    bad.step = StepPolicy::backtracking(1.5);
    CHECK_THROWS_AS(regularized_lasso(c, 1.0, bad), Error);
  }

  TEST_CASE("OLS examples") {
    Rng rng(20);
    const Matrix sxy = random_matrix(4, 3, rng);
    CHECK((ols_baseline(make_covs(Matrix::Identity(4, 4), sxy)).theta_hat - sxy).norm() < 1e-14);

    const Matrix theta0 = random_matrix(6, 4, rng);
    const Dataset data = gen_lrmr_dataset(theta0, 40, 0.0, rng);
    const EstimateReport r = ols_baseline(surrogate_covariances(data.x(), data.y(), 0.0));
    CHECK((r.theta_hat - theta0).norm() <= 1e-8);

    for (int t = 0; t < 20; ++t) {
      const SurrogateCovs c = make_covs(testutil::random_spd(8, rng), random_matrix(8, 5, rng));
      const Matrix th = ols_baseline(c).theta_hat;
      REQUIRE((c.sxx * th - c.sxy).norm() <= 1e-8 * c.sxy.norm());
    }
  }

  TEST_CASE("OLS rejects singular Sxx") {
    Matrix sxx = Matrix::Identity(3, 3);
    sxx(2, 2) = 0.0;
    CHECK_THROWS_WITH_AS(ols_baseline(make_covs(sxx, Matrix::Ones(3, 2))),
                         "OLS requires nonsingular surrogate covariance", Error);
  }

  TEST_CASE("prediction error") {
    Rng rng(21);
    const Matrix theta0 = random_matrix(5, 3, rng);
    const Dataset clean = gen_lrmr_dataset(theta0, 50, 0.0, rng);
    CHECK(prediction_error(theta0, clean) < 1e-14);
    CHECK(prediction_error(Matrix::Zero(5, 3), clean) == doctest::Approx(1.0));
    const Dataset noisy = gen_lrmr_dataset(theta0, 50, 0.5, rng);
    const Matrix theta = random_matrix(5, 3, rng);
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 0; k < 50; ++k) {
      num += (noisy.y().col(k) - theta.transpose() * noisy.x().col(k)).squaredNorm();
      den += noisy.y().col(k).squaredNorm();
    }
    CHECK(prediction_error(theta, noisy) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-12));
    CHECK_THROWS_AS(prediction_error(theta, Dataset(noisy.x(), Matrix::Zero(3, 50))), Error);
  }

  TEST_CASE("the solution moves continuously as delta2 goes to zero") {
    Rng rng(22);
    const Matrix theta0 = gen_lowrank_theta(10, 8, 2, rng);
    const Dataset data = gen_lrmr_dataset(theta0, 400, 0.3, rng);
    const double lambda = lambda_schedule(10, 8, 400, 0.5);
    Rng q0(23), q1(23);
    const auto a = regularized_lasso(surrogate_covariances(quantize_dataset(data, {0.0, 0.0}, q0)), lambda);
    const auto b = regularized_lasso(surrogate_covariances(quantize_dataset(data, {0.0, 1e-6}, q1)), lambda);
    CHECK((a.theta_hat - b.theta_hat).norm() <= 1e-4);
  }
}
