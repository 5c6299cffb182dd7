#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace qlrmr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD, M = U diag(s) V^T, singular values nonincreasing.
struct SvdFactors {
  Matrix u;
  Vector singular_values;
  Matrix v;

  Matrix reconstruct() const;
};

/// Throws ErrorKind::numeric if the decomposition fails to converge; the
/// message carries the reconstruction residual.
SvdFactors svd(const Matrix& m);

double nuclear_norm(const Matrix& m);
double operator_norm(const Matrix& m);
double frobenius_norm(const Matrix& m);

/// Singular value soft-thresholding, the proximal map of tau * ||.||_nu.
Matrix svt(const Matrix& m, double tau);

/// Euclidean projection onto {X : ||X||_nu <= radius}.
Matrix project_nuclear_ball(const Matrix& m, double radius);

/// Projection of a nonnegative vector onto {s >= 0, sum(s) <= radius}.
Vector project_capped_simplex(const Vector& s, double radius);

Matrix symmetrize(const Matrix& m);
double min_eigenvalue(const Matrix& symmetric);
double max_eigenvalue(const Matrix& symmetric);

void require_finite(const Matrix& m, std::string_view what);

}  // namespace qlrmr
