#ifndef ASYBO_KERNEL_HPP
#define ASYBO_KERNEL_HPP

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

#include "asybo/types.hpp"

namespace asybo {

enum class KernelFamily {
  SquaredExponential,
  Matern32,
  Matern52,
  Exponential,
  GammaExponential,
  RationalQuadratic,
  PiecewisePolyD0,
};

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& name);

/// Stationary covariance function: family plus length scales and shape parameters.
///
/// `length_scale` holds either one shared scale or one scale per input dimension.
/// Distances are computed as r = ||(x - x') / l|| so the radial forms below see
/// an already-scaled radius.
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  Vector length_scale = Vector::Ones(1);
  double gamma = 1.0;   // GammaExponential shape, in (0, 2]
  double alpha = 1.0;   // RationalQuadratic shape, > 0
  int dim = 1;          // PiecewisePolyD0 support dimension, >= 1

  void validate() const {
    if (length_scale.size() < 1) throw std::invalid_argument("length_scale must have at least one component");
    for (Eigen::Index i = 0; i < length_scale.size(); ++i)
      if (!(length_scale[i] > 0.0) || !std::isfinite(length_scale[i]))
        throw std::invalid_argument("length_scale must be strictly positive and finite");
    if (family == KernelFamily::GammaExponential && !(gamma > 0.0 && gamma <= 2.0))
      throw std::invalid_argument("gamma must lie in (0, 2]");
    if (family == KernelFamily::RationalQuadratic && !(alpha > 0.0))
      throw std::invalid_argument("alpha must be positive");
    if (family == KernelFamily::PiecewisePolyD0 && dim < 1)
      throw std::invalid_argument("dim must be at least 1");
  }
};

/// Returns a spec identical except for the length scales; the input is untouched.
inline KernelSpec set_length_scale(KernelSpec spec, const Vector& l) {
  if (l.size() < 1) throw std::invalid_argument("length_scale must have at least one component");
  for (Eigen::Index i = 0; i < l.size(); ++i)
    if (!(l[i] > 0.0) || !std::isfinite(l[i]))
      throw std::invalid_argument("length_scale must be strictly positive and finite");
  spec.length_scale = l;
  return spec;
}

inline KernelSpec set_length_scale(KernelSpec spec, double l) {
  return set_length_scale(std::move(spec), Vector::Constant(1, l));
}

namespace detail {

/// Radial profile k(r) on the scaled radius. Every family satisfies k(0) = 1.
inline double radial_value(const KernelSpec& spec, double r) {
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return std::exp(-r * r);
    case KernelFamily::Matern32: {
      const double a = std::sqrt(3.0) * r;
      return (1.0 + a) * std::exp(-a);
    }
    case KernelFamily::Matern52: {
      const double a = std::sqrt(5.0) * r;
      return (1.0 + a + 5.0 * r * r / 3.0) * std::exp(-a);
    }
    case KernelFamily::Exponential:
      return std::exp(-r);
    case KernelFamily::GammaExponential:
      return std::exp(-std::pow(r, spec.gamma));
    case KernelFamily::RationalQuadratic:
      return std::pow(1.0 + r * r / (2.0 * spec.alpha), -spec.alpha);
    case KernelFamily::PiecewisePolyD0: {
      if (r >= 1.0) return 0.0;
      const int j = spec.dim / 2 + 1;  // floor(D/2) + q + 1 with q = 0
      return std::pow(1.0 - r, j);
    }
  }
  throw std::logic_error("unknown kernel family");
}

template <typename DA, typename DB>
double scaled_radius(const KernelSpec& spec, const Eigen::MatrixBase<DA>& x,
                     const Eigen::MatrixBase<DB>& x2) {
  if (x.size() != x2.size()) throw std::invalid_argument("kernel points differ in dimension");
  if (!x.allFinite() || !x2.allFinite()) throw std::invalid_argument("kernel points must be finite");
  const Eigen::Index n = spec.length_scale.size();
  if (n == 1) return (x - x2).norm() / spec.length_scale[0];
  if (n != x.size())
    throw std::invalid_argument("length_scale dimension does not match the points");
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = (x(i) - x2(i)) / spec.length_scale[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace detail

/// Covariance between two points. Accepts any dense Eigen expressions (e.g. matrix rows).
/// The spec is taken as already valid; construction sites call KernelSpec::validate.
template <typename DA, typename DB>
double kernel_eval(const KernelSpec& spec, const Eigen::MatrixBase<DA>& x,
                   const Eigen::MatrixBase<DB>& x2) {
  return detail::radial_value(spec, detail::scaled_radius(spec, x, x2));
}

/// Gram matrix of pairwise covariances over the rows of X.
Matrix gram_matrix(const KernelSpec& spec, const Matrix& X);

/// Covariance vector k(x) against every row of X.
Vector covariance_vector(const KernelSpec& spec, const Matrix& X, const Vector& x);

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::SquaredExponential: return "squared-exponential";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::GammaExponential: return "gamma-exponential";
    case KernelFamily::RationalQuadratic: return "rational-quadratic";
    case KernelFamily::PiecewisePolyD0: return "piecewise-poly";
  }
  return "unknown";
}

inline KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "squared-exponential" || name == "se") return KernelFamily::SquaredExponential;
  if (name == "matern32") return KernelFamily::Matern32;
  if (name == "matern52") return KernelFamily::Matern52;
  if (name == "exponential") return KernelFamily::Exponential;
  if (name == "gamma-exponential") return KernelFamily::GammaExponential;
  if (name == "rational-quadratic") return KernelFamily::RationalQuadratic;
  if (name == "piecewise-poly") return KernelFamily::PiecewisePolyD0;
  throw std::invalid_argument("unknown kernel family '" + name + "'");
}

inline Matrix gram_matrix(const KernelSpec& spec, const Matrix& X) {
  const Eigen::Index n = X.rows();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = kernel_eval(spec, X.row(i), X.row(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      K(i, j) = kernel_eval(spec, X.row(i), X.row(j));
      K(j, i) = K(i, j);
    }
  }
  return K;
}

inline Vector covariance_vector(const KernelSpec& spec, const Matrix& X, const Vector& x) {
  Vector k(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) k[i] = kernel_eval(spec, X.row(i), x.transpose());
  return k;
}

}  // namespace asybo

#endif  // ASYBO_KERNEL_HPP
