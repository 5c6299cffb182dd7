#include "qlrmr/linalg.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "qlrmr/error.hpp"

namespace qlrmr {

Matrix SvdFactors::reconstruct() const {
  return u * singular_values.asDiagonal() * v.transpose();
}

SvdFactors svd(const Matrix& m) {
  require_finite(m, "svd input");
  if (m.size() == 0) return {Matrix(m.rows(), 0), Vector(0), Matrix(m.cols(), 0)};
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  if (dec.info() != Eigen::Success || !out.singular_values.allFinite()) {
    const double residual = out.singular_values.allFinite()
                                ? (m - out.reconstruct()).norm()
                                : std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::numeric,
                "svd did not converge (residual " + std::to_string(residual) + ")");
  }
  return out;
}

double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  require_finite(m, "nuclear_norm input");
  Eigen::BDCSVD<Matrix> dec(m);
  return dec.singularValues().sum();
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  require_finite(m, "operator_norm input");
  Eigen::BDCSVD<Matrix> dec(m);
  return dec.singularValues()(0);
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

Matrix svt(const Matrix& m, double tau) {
  require(tau >= 0.0, ErrorKind::invalid_argument, "svt: tau must be nonnegative");
  if (tau == 0.0) return m;
  SvdFactors f = svd(m);
  Eigen::Index keep = 0;
  while (keep < f.singular_values.size() && f.singular_values(keep) > tau) ++keep;
  if (keep == 0) return Matrix::Zero(m.rows(), m.cols());
  const Vector shrunk = f.singular_values.head(keep).array() - tau;
  return f.u.leftCols(keep) * shrunk.asDiagonal() * f.v.leftCols(keep).transpose();
}

Vector project_capped_simplex(const Vector& s, double radius) {
  require(radius >= 0.0, ErrorKind::invalid_argument, "projection radius must be nonnegative");
  if (s.sum() <= radius) return s;
  if (radius == 0.0) return Vector::Zero(s.size());
  std::vector<double> sorted(s.data(), s.data() + s.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest k with sorted[k-1] - (cumsum_k - radius) / k > 0.
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    const double candidate = (cumsum - radius) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  return (s.array() - theta).max(0.0).matrix();
}

Matrix project_nuclear_ball(const Matrix& m, double radius) {
  require(radius >= 0.0, ErrorKind::invalid_argument, "projection radius must be nonnegative");
  if (radius == 0.0) return Matrix::Zero(m.rows(), m.cols());
  SvdFactors f = svd(m);
  if (f.singular_values.sum() <= radius) return m;
  const Vector s = project_capped_simplex(f.singular_values, radius);
  return f.u * s.asDiagonal() * f.v.transpose();
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Matrix& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) throw Error(ErrorKind::numeric, std::string(what) + ": non-finite entry");
}

}  // namespace qlrmr
