#ifndef ASYBO_LINALG_HPP
#define ASYBO_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>

#include "asybo/errors.hpp"
#include "asybo/types.hpp"

namespace asybo {

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Throws FactorizationError naming the first failing pivot.
inline Matrix cholesky_factor(const Matrix& A) {
  const Eigen::Index n = A.rows();
  Matrix L = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = A(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d))
      throw FactorizationError("matrix is not positive definite", j);
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double s = A(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

/// Extends the factor of A to the factor of [[A, B^T], [B, C]] without refactoring
/// the leading block. B is k x n, C is k x k. Costs O(n^2 k + k^3).
inline Matrix cholesky_append(const Matrix& L, const Matrix& B, const Matrix& C) {
  const Eigen::Index n = L.rows();
  const Eigen::Index k = B.rows();
  Matrix out = Matrix::Zero(n + k, n + k);
  out.topLeftCorner(n, n) = L;
  if (k == 0) return out;

  // L21 solves L21 L^T = B.
  Matrix L21 = L.triangularView<Eigen::Lower>().solve(B.transpose()).transpose();
  out.block(n, 0, k, n) = L21;

  Matrix S = C - L21 * L21.transpose();
  for (Eigen::Index j = 0; j < k; ++j) {
    double d = S(j, j) - out.row(n + j).segment(n, j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d))
      throw FactorizationError("extended matrix is not positive definite", n + j);
    out(n + j, n + j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < k; ++i) {
      const double s = S(i, j) - out.row(n + i).segment(n, j).dot(out.row(n + j).segment(n, j));
      out(n + i, n + j) = s / out(n + j, n + j);
    }
  }
  return out;
}

/// Solves (L L^T) x = b by forward then back substitution.
inline Vector cholesky_solve(const Matrix& L, const Vector& b) {
  Vector z = L.triangularView<Eigen::Lower>().solve(b);
  return L.transpose().triangularView<Eigen::Upper>().solve(z);
}

}  // namespace asybo

#endif  // ASYBO_LINALG_HPP
