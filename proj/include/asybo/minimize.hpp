#ifndef ASYBO_MINIMIZE_HPP
#define ASYBO_MINIMIZE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "asybo/errors.hpp"
#include "asybo/sampling.hpp"
#include "asybo/types.hpp"

namespace asybo {

/// Bounded derivative-free minimization: multistart reflection/contraction simplex
/// descent with coordinate clipping to the box.
struct MinimizeSpec {
  Box bounds;
  int n_starts = 0;  // 0 resolves to 8 per dimension
  int max_evals = 2000;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::optional<Vector> incumbent;  // extra start, e.g. the best point so far

  int resolved_starts() const {
    return n_starts > 0 ? n_starts : 8 * static_cast<int>(bounds.dim());
  }

  void validate() const {
    if (bounds.dim() < 1) throw std::invalid_argument("minimize bounds are empty");
    if (n_starts < 0) throw std::invalid_argument("n_starts must be non-negative");
    if (max_evals < resolved_starts())
      throw std::invalid_argument("max_evals must cover at least one evaluation per start");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  }
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  int evaluations = 0;
  // Local minimum reached from each start, in start order. select_infill uses these
  // as alternates when the global best collides with an already-chosen point.
  std::vector<std::pair<Vector, double>> local_minima;
};

using Objective = std::function<double(const Vector&)>;

namespace detail {

inline double checked_eval(const Objective& f, const Vector& x, int& evals) {
  ++evals;
  const double v = f(x);
  if (!std::isfinite(v)) throw ObjectiveEvaluationError("objective returned a non-finite value", x);
  return v;
}

/// One Nelder-Mead descent from an already-scored start. Evaluations are clipped
/// to the box and capped by eval_budget (an absolute count shared via `evals`).
inline std::pair<Vector, double> simplex_descent(const Objective& f, const Box& box,
                                                 Vector start, double f_start, double tol,
                                                 int eval_budget, int& evals) {
  const Eigen::Index d = box.dim();
  const int nv = static_cast<int>(d) + 1;
  if (evals + static_cast<int>(d) > eval_budget) return {std::move(start), f_start};

  const double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

  std::vector<Vector> xs;
  std::vector<double> fs;
  xs.reserve(nv);
  fs.reserve(nv);
  xs.push_back(std::move(start));
  fs.push_back(f_start);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vector v = xs[0];
    const double step = 0.05 * (box.high[i] - box.low[i]);
    v[i] += (v[i] + step <= box.high[i]) ? step : -step;
    xs.push_back(box.clip(v));
    fs.push_back(checked_eval(f, xs.back(), evals));
  }

  auto order = [&] {
    for (int i = 1; i < nv; ++i) {
      int j = i;
      while (j > 0 && fs[j] < fs[j - 1]) {
        std::swap(fs[j], fs[j - 1]);
        std::swap(xs[j], xs[j - 1]);
        --j;
      }
    }
  };
  order();

  while (evals + 2 <= eval_budget) {
    double diam = 0.0;
    for (int i = 1; i < nv; ++i) diam = std::max(diam, (xs[i] - xs[0]).norm());
    if (diam < tol) break;

    Vector centroid = Vector::Zero(d);
    for (int i = 0; i + 1 < nv; ++i) centroid += xs[i];
    centroid /= static_cast<double>(nv - 1);

    Vector xr = box.clip(centroid + reflect * (centroid - xs[nv - 1]));
    const double fr = checked_eval(f, xr, evals);

    if (fr < fs[0]) {
      Vector xe = box.clip(centroid + expand * (centroid - xs[nv - 1]));
      const double fe = checked_eval(f, xe, evals);
      if (fe < fr) { xs[nv - 1] = xe; fs[nv - 1] = fe; }
      else         { xs[nv - 1] = xr; fs[nv - 1] = fr; }
    } else if (fr < fs[nv - 2]) {
      xs[nv - 1] = xr;
      fs[nv - 1] = fr;
    } else {
      Vector xc = box.clip(centroid + contract * (xs[nv - 1] - centroid));
      const double fc = checked_eval(f, xc, evals);
      if (fc < fs[nv - 1]) {
        xs[nv - 1] = xc;
        fs[nv - 1] = fc;
      } else {
        for (int i = 1; i < nv; ++i) {
          if (evals >= eval_budget) break;
          xs[i] = box.clip(xs[0] + shrink * (xs[i] - xs[0]));
          fs[i] = checked_eval(f, xs[i], evals);
        }
      }
    }
    order();
  }
  return {xs[0], fs[0]};
}

}  // namespace detail

/// Best (point, value) over n_starts descents seeded from a Latin-hypercube start
/// set plus the incumbent. Every start is scored before any descent runs, so the
/// result never loses to a seed. Deterministic for a fixed spec and objective.
inline MinimizeResult minimize(const Objective& f, const MinimizeSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(mix_seed(spec.seed, 0x6d696e696dULL));

  const int n_starts = spec.resolved_starts();
  std::vector<Vector> starts;
  Matrix lhs = latin_hypercube(n_starts, spec.bounds.dim(), rng);
  for (int i = 0; i < n_starts; ++i)
    starts.push_back(spec.bounds.denormalize(lhs.row(i).transpose()));
  if (spec.incumbent) starts.push_back(spec.bounds.clip(*spec.incumbent));

  MinimizeResult result;
  int evals = 0;

  std::vector<double> f_starts(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    f_starts[i] = detail::checked_eval(f, starts[i], evals);
    if (i == 0 || f_starts[i] < result.value) {
      result.x = starts[i];
      result.value = f_starts[i];
    }
  }

  const int per_start =
      std::max((spec.max_evals - evals) / static_cast<int>(starts.size()), 0);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const int budget = std::min(spec.max_evals, evals + per_start);
    auto [x, v] =
        detail::simplex_descent(f, spec.bounds, starts[i], f_starts[i], spec.tol, budget, evals);
    result.local_minima.emplace_back(x, v);
    if (v < result.value) {
      result.x = x;
      result.value = v;
    }
  }
  result.evaluations = evals;
  return result;
}

}  // namespace asybo

#endif  // ASYBO_MINIMIZE_HPP
