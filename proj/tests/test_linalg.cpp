#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "qlrmr/error.hpp"
#include "qlrmr/linalg.hpp"
#include "test_util.hpp"

using namespace qlrmr;
using testutil::random_matrix;

namespace {

double nuclear_objective(const Matrix& x, const Matrix& m, double tau) {
  return 0.5 * (x - m).squaredNorm() + tau * oracle::nuclear(x);
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("svd examples") {
    const SvdFactors id = svd(Matrix::Identity(3, 3));
    CHECK(id.singular_values.isApprox(Vector::Ones(3)));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -4.0;
    const SvdFactors f = svd(d);
    CHECK(f.singular_values(0) == doctest::Approx(4.0));
    CHECK(f.singular_values(1) == doctest::Approx(3.0));
  }

  TEST_CASE("svd reconstruction and orthonormality over random shapes") {
    Rng rng(100);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto rows = static_cast<Eigen::Index>(1 + rng.next_u64() % 100);
      const auto cols = static_cast<Eigen::Index>(1 + rng.next_u64() % 100);
      const Matrix m = random_matrix(rows, cols, rng);
      const SvdFactors f = svd(m);
      const auto k = f.singular_values.size();
      REQUIRE(k == std::min(rows, cols));
      REQUIRE((m - f.reconstruct()).norm() <= 1e-8 * m.norm());
      REQUIRE((f.u.transpose() * f.u - Matrix::Identity(k, k)).norm() <= 1e-8 * k);
      REQUIRE((f.v.transpose() * f.v - Matrix::Identity(k, k)).norm() <= 1e-8 * k);
      for (Eigen::Index i = 0; i < k; ++i) {
        REQUIRE(f.singular_values(i) >= 0.0);
        if (i > 0) REQUIRE(f.singular_values(i) <= f.singular_values(i - 1));
      }
    }
  }

  TEST_CASE("svd of a 20x15 matrix against the eigenvalue route") {
    Rng rng(101);
    const Matrix m = random_matrix(20, 15, rng);
    const SvdFactors f = svd(m);
    CHECK((m - f.reconstruct()).norm() <= 1e-8 * m.norm());
    CHECK((f.singular_values - oracle::singular_values(m)).norm() < 1e-10);
  }

  TEST_CASE("svd rejects non-finite input") {
    Matrix m = Matrix::Ones(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd(m), Error);
  }

  TEST_CASE("norm examples") {
    const Matrix id = Matrix::Identity(3, 3);
    CHECK(nuclear_norm(id) == doctest::Approx(3.0));
    CHECK(operator_norm(id) == doctest::Approx(1.0));
    CHECK(frobenius_norm(id) == doctest::Approx(std::sqrt(3.0)));
    Rng rng(102);
    Vector u = random_matrix(5, 1, rng).col(0).normalized();
    Vector v = random_matrix(4, 1, rng).col(0).normalized();
    const Matrix r1 = u * v.transpose();
    CHECK(nuclear_norm(r1) == doctest::Approx(1.0));
    CHECK(operator_norm(r1) == doctest::Approx(1.0));
    CHECK(frobenius_norm(r1) == doctest::Approx(1.0));
  }

  TEST_CASE("norm ordering on random matrices") {
    Rng rng(103);
    for (int i = 0; i < 100; ++i) {
      const Matrix m = random_matrix(10, 8, rng);
      REQUIRE(nuclear_norm(m) >= frobenius_norm(m));
      REQUIRE(frobenius_norm(m) >= operator_norm(m));
    }
  }

  TEST_CASE("nuclear norm is unitarily invariant") {
    Rng rng(104);
    for (int i = 0; i < 50; ++i) {
      const Matrix m = random_matrix(7, 5, rng);
      const Matrix q1 = testutil::random_orthogonal(7, rng);
      const Matrix q2 = testutil::random_orthogonal(5, rng);
      REQUIRE(std::abs(nuclear_norm(q1.transpose() * m * q2) - nuclear_norm(m)) < 1e-8);
    }
  }

  TEST_CASE("svt examples") {
    Rng rng(105);
    const Matrix m = random_matrix(4, 6, rng);
    CHECK(svt(m, 0.0) == m);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = 1.0;
    CHECK((svt(d, 2.0) - expected).norm() < 1e-12);
    CHECK(svt(m, 1e6).norm() == 0.0);
    CHECK_THROWS_AS(svt(m, -1.0), Error);
  }

  TEST_CASE("svt matches the eigenvalue oracle") {
    Rng rng(106);
    for (int i = 0; i < 100; ++i) {
      const Matrix m = random_matrix(6, 5, rng);
      const double tau = 0.5 + rng.uniform01() * 2.0;
      REQUIRE((svt(m, tau) - oracle::svt(m, tau)).norm() < 1e-6);
    }
  }

  TEST_CASE("svt output is a first-order minimizer") {
    Rng rng(107);
    const Matrix m = random_matrix(4, 4, rng);
    const double tau = 0.7;
    const Matrix x = svt(m, tau);
    const double fx = nuclear_objective(x, m, tau);
    for (int i = 0; i < 100; ++i) {
      const Matrix g = random_matrix(4, 4, rng).normalized();
      REQUIRE(fx <= nuclear_objective(x + 1e-3 * g, m, tau) + 1e-12);
    }
    // Optimality certificate: ||M - X||_op <= tau, <M - X, X> = tau ||X||_nu.
    CHECK(operator_norm(m - x) <= tau + 1e-10);
    CHECK((m - x).cwiseProduct(x).sum() == doctest::Approx(tau * nuclear_norm(x)).epsilon(1e-10));
  }

  TEST_CASE("svt is nonexpansive") {
    Rng rng(108);
    for (int i = 0; i < 100; ++i) {
      const Matrix a = random_matrix(5, 7, rng), b = random_matrix(5, 7, rng);
      REQUIRE((svt(a, 1.0) - svt(b, 1.0)).norm() <= (a - b).norm() + 1e-12);
    }
  }

  TEST_CASE("capped simplex projection") {
    Vector s(2);
    s << 2.0, 2.0;
    CHECK(project_capped_simplex(s, 2.0).isApprox(Vector::Ones(2)));
    Vector t(3);
    t << 3.0, 1.0, 0.2;
    const Vector p = project_capped_simplex(t, 2.0);
    CHECK(p(0) == doctest::Approx(2.0));
    CHECK(p(1) == doctest::Approx(0.0));
    CHECK(p(2) == doctest::Approx(0.0));
    CHECK(project_capped_simplex(t, 10.0) == t);
    CHECK(project_capped_simplex(t, 0.0).isZero());
  }

  TEST_CASE("nuclear ball projection examples") {
    Rng rng(109);
    const Matrix m = random_matrix(3, 3, rng);
    CHECK(project_nuclear_ball(m, nuclear_norm(m) + 1.0) == m);
    const Matrix d = 2.0 * Matrix::Identity(2, 2);
    CHECK((project_nuclear_ball(d, 2.0) - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK(project_nuclear_ball(m, 0.0).isZero(0.0));
    CHECK_THROWS_AS(project_nuclear_ball(m, -1.0), Error);
  }

  TEST_CASE("nuclear ball projection matches the bisection oracle") {
    Rng rng(110);
    for (int i = 0; i < 100; ++i) {
      const Matrix m = random_matrix(6, 5, rng);
      const double radius = i == 0 ? 1.0 : 0.2 + 3.0 * rng.uniform01();
      REQUIRE((project_nuclear_ball(m, radius) - oracle::project_nuclear_ball(m, radius)).norm() <
              1e-6);
    }
  }

  TEST_CASE("nuclear ball projection: feasibility, idempotence, variational inequality") {
    Rng rng(111);
    for (int i = 0; i < 100; ++i) {
      const Matrix m = random_matrix(6, 5, rng);
      const double radius = 0.5 + rng.uniform01();
      const Matrix p = project_nuclear_ball(m, radius);
      REQUIRE(nuclear_norm(p) <= radius + 1e-8);
      REQUIRE((project_nuclear_ball(p, radius) - p).norm() <= 1e-8);
      // <M - P, Z - P> <= 0 for feasible Z.
      for (int k = 0; k < 10; ++k) {
        Matrix z = random_matrix(6, 5, rng);
        z *= radius * rng.uniform01() / nuclear_norm(z);
        REQUIRE((m - p).cwiseProduct(z - p).sum() <= 1e-9);
      }
    }
  }

  TEST_CASE("eigenvalue helpers") {
    Matrix s(2, 2);
    s << 2.0, 1.0, 1.0, 2.0;
    CHECK(min_eigenvalue(s) == doctest::Approx(1.0));
    CHECK(max_eigenvalue(s) == doctest::Approx(3.0));
    Matrix a(2, 2);
    a << 1.0, 2.0, 0.0, 1.0;
    CHECK(symmetrize(a)(0, 1) == 1.0);
    CHECK(symmetrize(a)(1, 0) == 1.0);
  }
}
