#ifndef ASYBO_GP_HPP
#define ASYBO_GP_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "asybo/errors.hpp"
#include "asybo/kernel.hpp"
#include "asybo/linalg.hpp"
#include "asybo/types.hpp"

namespace asybo {

/// Separation below which two training inputs count as the same point.
inline constexpr double kDuplicateTol = 1e-12;

/// Gaussian-process surrogate over N training pairs. Immutable after construction;
/// fit and extend return fresh states, and predict may be called concurrently.
struct GpState {
  Matrix X;        // N x d, one training input per row
  Vector y;        // N cost values
  KernelSpec kernel;
  double jitter = 0.0;
  Matrix chol;     // lower-triangular L with L L^T = K + jitter I
  Vector weights;  // (K + jitter I)^{-1} y

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;           // clamped at zero from below
  double variance_unclamped = 0.0; // pre-clamp value, kept for diagnostics
};

namespace detail {

inline void check_distinct(const Matrix& A, const Matrix& B, bool same) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = same ? i + 1 : 0; j < B.rows(); ++j) {
      if ((A.row(i) - B.row(j)).norm() < kDuplicateTol)
        throw DuplicatePointError("training points " + std::to_string(i) + " and " +
                                  std::to_string(j) + " coincide");
    }
  }
}

}  // namespace detail

/// Fits a surrogate from scratch: full factorization of K + jitter I, weights by
/// forward/back substitution.
inline GpState gp_fit(const Matrix& X, const Vector& y, const KernelSpec& kernel,
                      double jitter) {
  if (X.rows() < 1) throw std::invalid_argument("gp_fit needs at least one point");
  if (X.rows() != y.size()) throw std::invalid_argument("X and y disagree on N");
  if (!X.allFinite() || !y.allFinite())
    throw std::invalid_argument("training data must be finite");
  if (!(jitter >= 0.0)) throw std::invalid_argument("jitter must be non-negative");
  kernel.validate();
  detail::check_distinct(X, X, true);

  GpState s;
  s.X = X;
  s.y = y;
  s.kernel = kernel;
  s.jitter = jitter;
  Matrix K = gram_matrix(kernel, X);
  K.diagonal().array() += jitter;
  s.chol = cholesky_factor(K);
  s.weights = cholesky_solve(s.chol, y);
  return s;
}

/// Appends new training pairs, growing the existing factor by block rows instead
/// of refactoring. Weights are re-solved against the enlarged factor.
inline GpState gp_extend(const GpState& state, const Matrix& X_new, const Vector& y_new) {
  if (X_new.rows() == 0) return state;
  if (X_new.rows() != y_new.size()) throw std::invalid_argument("X_new and y_new disagree on N");
  if (X_new.cols() != state.dim()) throw std::invalid_argument("X_new dimension mismatch");
  if (!X_new.allFinite() || !y_new.allFinite())
    throw std::invalid_argument("training data must be finite");
  detail::check_distinct(X_new, X_new, true);
  detail::check_distinct(X_new, state.X, false);

  const Eigen::Index n = state.size();
  const Eigen::Index k = X_new.rows();

  Matrix B(k, n);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      B(i, j) = kernel_eval(state.kernel, X_new.row(i), state.X.row(j));
  Matrix C = gram_matrix(state.kernel, X_new);
  C.diagonal().array() += state.jitter;

  GpState s;
  s.kernel = state.kernel;
  s.jitter = state.jitter;
  s.X.resize(n + k, state.dim());
  s.X << state.X, X_new;
  s.y.resize(n + k);
  s.y << state.y, y_new;
  s.chol = cholesky_append(state.chol, B, C);
  s.weights = cholesky_solve(s.chol, s.y);
  return s;
}

/// Posterior mean and variance at a query point. One covariance pass plus one
/// triangular solve; variance is clamped at zero.
inline Prediction gp_predict(const GpState& state, const Vector& x) {
  if (x.size() != state.dim()) throw std::invalid_argument("query dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("query point must be finite");

  Vector k = covariance_vector(state.kernel, state.X, x);
  Prediction p;
  p.mean = k.dot(state.weights);
  Vector v = state.chol.triangularView<Eigen::Lower>().solve(k);
  p.variance_unclamped = kernel_eval(state.kernel, x, x) - v.squaredNorm();
  p.variance = p.variance_unclamped < 0.0 ? 0.0 : p.variance_unclamped;
  return p;
}

}  // namespace asybo

#endif  // ASYBO_GP_HPP
