#ifndef ASYBO_TYPES_HPP
#define ASYBO_TYPES_HPP

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace asybo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned search box with per-dimension bounds.
struct Box {
  Vector low;
  Vector high;

  Box() = default;
  Box(Vector lo, Vector hi) : low(std::move(lo)), high(std::move(hi)) {
    if (low.size() != high.size()) throw std::invalid_argument("box bounds differ in dimension");
    for (Eigen::Index i = 0; i < low.size(); ++i) {
      if (!(low[i] < high[i]) || !std::isfinite(low[i]) || !std::isfinite(high[i]))
        throw std::invalid_argument("box requires finite low < high in dimension " + std::to_string(i));
    }
  }

  Eigen::Index dim() const { return low.size(); }
  Vector width() const { return high - low; }

  bool contains(const Vector& x, double slack = 0.0) const {
    if (x.size() != low.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] < low[i] - slack || x[i] > high[i] + slack) return false;
    return true;
  }

  Vector clip(Vector x) const {
    return x.cwiseMax(low).cwiseMin(high);
  }

  /// Map a point to [0,1]^d coordinates.
  Vector normalize(const Vector& x) const { return ((x - low).array() / width().array()).matrix(); }

  /// Map [0,1]^d coordinates back to the box.
  Vector denormalize(const Vector& u) const { return low + (u.array() * width().array()).matrix(); }

  static Box unit(Eigen::Index d) { return Box(Vector::Zero(d), Vector::Ones(d)); }
};

/// Standard normal density.
inline double normal_pdf(double z) {
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

/// Standard normal CDF via erfc, accurate in both tails.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace asybo

#endif  // ASYBO_TYPES_HPP
