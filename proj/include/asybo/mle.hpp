#ifndef ASYBO_MLE_HPP
#define ASYBO_MLE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "asybo/errors.hpp"
#include "asybo/kernel.hpp"
#include "asybo/linalg.hpp"
#include "asybo/minimize.hpp"
#include "asybo/types.hpp"

namespace asybo {

/// Model-quality metric used for length-scale selection:
///
///   value = log(y' K^-1 y) + (1/N) log det K
///
/// Lower is better. The first term quantifies data fit, the second penalizes
/// complexity (small length scales make K near-singular, large ones stiffen it).
struct MleReport {
  double value = std::numeric_limits<double>::quiet_NaN();
  double fit_term = std::numeric_limits<double>::quiet_NaN();         // log(y' K^-1 y)
  double complexity_term = std::numeric_limits<double>::quiet_NaN();  // (1/N) log det K
  Vector length_scale;  // scales the metric was evaluated at
};

inline MleReport mle_objective(const Matrix& X, const Vector& y, const KernelSpec& kernel,
                               double jitter) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw std::invalid_argument("mle_objective needs at least two observations");
  if (y.size() != n) throw std::invalid_argument("observation count mismatch between X and y");
  if (jitter < 0.0) throw std::invalid_argument("jitter must be non-negative");
  kernel.validate();

  Matrix K = gram_matrix(kernel, X);
  K.diagonal().array() += jitter;
  const Matrix L = cholesky_factor(K);
  const Vector w = cholesky_solve(L, y);

  const double quad = y.dot(w);
  if (!(quad > 0.0))
    throw NumericalDomainError("quadratic form y' K^-1 y is not positive, cannot take its log");

  MleReport report;
  report.fit_term = std::log(quad);
  // log det K = 2 sum log L_ii; never an explicit determinant.
  report.complexity_term = 2.0 * L.diagonal().array().log().sum() / static_cast<double>(n);
  report.value = report.fit_term + report.complexity_term;
  report.length_scale = kernel.length_scale;
  return report;
}

struct TuneConfig {
  double scale_lo = 1e-2;  // length-scale search interval, normalized coordinates
  double scale_hi = 10.0;
  int budget = 64;  // total metric evaluations across seeding and refinement
  int gate = -1;    // min observations before tuning; -1 resolves to max(5, 2d)

  void validate() const {
    if (!(scale_lo > 0.0) || !(scale_hi > scale_lo))
      throw std::invalid_argument("length-scale bounds must satisfy 0 < lo < hi");
    if (budget < 1) throw std::invalid_argument("tuning budget must be at least 1");
  }
};

/// Observation count below which tuning is skipped: with too few points the
/// metric rewards degenerate scales, so the caller's kernel is kept as is.
inline Eigen::Index tune_gate(const TuneConfig& config, Eigen::Index dim) {
  if (config.gate >= 0) return config.gate;
  return std::max<Eigen::Index>(5, 2 * dim);
}

struct TuneResult {
  KernelSpec kernel;
  MleReport report;     // metric at the returned kernel; NaN-valued when gated off
  bool tuned = false;
  int evaluations = 0;
};

/// Selects a common length scale for all input dimensions by minimizing
/// mle_objective over log-scale: a 16-point log-spaced grid seeds a simplex
/// refinement, all within config.budget metric evaluations. The incumbent
/// kernel is always a candidate, so the result is never worse than the input.
inline TuneResult tune_length_scale(const Matrix& X, const Vector& y, const KernelSpec& kernel,
                                    double jitter, const TuneConfig& config = {}) {
  config.validate();
  kernel.validate();

  TuneResult result;
  result.kernel = kernel;
  if (X.rows() < tune_gate(config, X.cols())) return result;

  int evals = 0;
  double best_scale = kernel.length_scale.minCoeff();
  double best_value = std::numeric_limits<double>::infinity();
  MleReport best_report;

  // Failures (near-singular K at extreme scales) score as a large finite
  // penalty so the search just moves away from them. The best report is cached
  // as the search goes, keeping total metric evaluations within budget.
  constexpr double kPenalty = 1e30;
  auto score = [&](double scale) {
    ++evals;
    try {
      MleReport r = mle_objective(X, y, set_length_scale(kernel, scale), jitter);
      if (r.value < best_value) {
        best_value = r.value;
        best_scale = scale;
        best_report = r;
      }
      return r.value;
    } catch (const FactorizationError&) {
      return kPenalty;
    } catch (const NumericalDomainError&) {
      return kPenalty;
    }
  };

  if (score(best_scale) >= kPenalty) best_value = kPenalty;  // incumbent first

  const double log_lo = std::log(config.scale_lo);
  const double log_hi = std::log(config.scale_hi);
  double grid_best_log = std::log(std::clamp(best_scale, config.scale_lo, config.scale_hi));
  double grid_best_value = std::numeric_limits<double>::infinity();

  const int grid_n = std::min(16, config.budget - evals);
  for (int i = 0; i < grid_n; ++i) {
    const double t = grid_n > 1 ? static_cast<double>(i) / (grid_n - 1) : 0.5;
    const double log_scale = log_lo + t * (log_hi - log_lo);
    const double v = score(std::exp(log_scale));
    if (v < grid_best_value) {
      grid_best_value = v;
      grid_best_log = log_scale;
    }
  }

  if (config.budget - evals >= 3 && grid_best_value < kPenalty) {
    Box log_box(Vector::Constant(1, log_lo), Vector::Constant(1, log_hi));
    Objective f = [&](const Vector& s) { return score(std::exp(s[0])); };
    int descent_evals = 0;
    detail::simplex_descent(f, log_box, Vector::Constant(1, grid_best_log), grid_best_value,
                            1e-6, config.budget - evals, descent_evals);
  }

  if (best_value >= kPenalty)
    throw FactorizationError(
        "no length scale in range produced a positive definite kernel matrix", 0);

  result.kernel = set_length_scale(kernel, best_scale);
  result.report = best_report;
  result.tuned = true;
  result.evaluations = evals;
  return result;
}

}  // namespace asybo

#endif  // ASYBO_MLE_HPP
