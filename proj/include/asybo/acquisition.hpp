#ifndef ASYBO_ACQUISITION_HPP
#define ASYBO_ACQUISITION_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "asybo/errors.hpp"
#include "asybo/gp.hpp"
#include "asybo/minimize.hpp"
#include "asybo/sampling.hpp"
#include "asybo/types.hpp"

namespace asybo {

enum class AcquisitionKind {
  LowerConfidenceBound,
  ExpectedImprovement,
  ProbabilityOfImprovement,
  PureExploration,  // posterior sd only, for budgeted surface reconstruction
};

inline std::string to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::LowerConfidenceBound: return "lcb";
    case AcquisitionKind::ExpectedImprovement: return "ei";
    case AcquisitionKind::ProbabilityOfImprovement: return "pi";
    case AcquisitionKind::PureExploration: return "explore";
  }
  throw std::invalid_argument("unknown acquisition kind");
}

inline AcquisitionKind acquisition_kind_from_string(const std::string& name) {
  if (name == "lcb") return AcquisitionKind::LowerConfidenceBound;
  if (name == "ei") return AcquisitionKind::ExpectedImprovement;
  if (name == "pi") return AcquisitionKind::ProbabilityOfImprovement;
  if (name == "explore") return AcquisitionKind::PureExploration;
  throw std::invalid_argument("unknown acquisition kind: " + name);
}

/// mean - kappa * sd. Small values mark points worth evaluating.
inline double lower_confidence_bound(double mean, double sd, double kappa) {
  if (sd < 0.0) throw std::invalid_argument("sd must be non-negative");
  if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
  return mean - kappa * sd;
}

/// E[max(f_min - Y, 0)] for Y ~ N(mean, sd^2); exactly 0 at sd = 0.
inline double expected_improvement(double mean, double sd, double f_min) {
  if (sd < 0.0) throw std::invalid_argument("sd must be non-negative");
  if (sd == 0.0) return 0.0;
  const double z = (f_min - mean) / sd;
  return (f_min - mean) * normal_cdf(z) + sd * normal_pdf(z);
}

/// P(Y < f_min) for Y ~ N(mean, sd^2); exactly 0 at sd = 0.
inline double probability_of_improvement(double mean, double sd, double f_min) {
  if (sd < 0.0) throw std::invalid_argument("sd must be non-negative");
  if (sd == 0.0) return 0.0;
  return normal_cdf((f_min - mean) / sd);
}

struct KappaSchedule {
  double kappa0 = 2.5;
  double decay = 1.0;  // per-iteration multiplier; 1.0 keeps kappa constant

  static KappaSchedule constant(double kappa) { return {kappa, 1.0}; }
  static KappaSchedule annealing(double kappa0, double decay) { return {kappa0, decay}; }

  void validate() const {
    if (kappa0 < 0.0) throw std::invalid_argument("kappa0 must be non-negative");
    if (!(decay > 0.0) || decay > 1.0) throw std::invalid_argument("decay must be in (0, 1]");
  }
};

inline double next_kappa(const KappaSchedule& schedule, int iteration) {
  if (iteration < 0) throw std::invalid_argument("iteration must be non-negative");
  return schedule.kappa0 * std::pow(schedule.decay, iteration);
}

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::LowerConfidenceBound;
  KappaSchedule schedule;
  double f_min = std::numeric_limits<double>::infinity();  // best completed value
  double dedup_radius = 1e-6;  // minimum separation between proposals, normalized coords

  void validate() const {
    schedule.validate();
    if (!(dedup_radius > 0.0)) throw std::invalid_argument("dedup_radius must be positive");
  }
};

/// All acquisitions cast to minimization: improvement-type values are negated.
inline double acq_eval(const AcquisitionSpec& spec, double mean, double sd, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
  switch (spec.kind) {
    case AcquisitionKind::LowerConfidenceBound: return lower_confidence_bound(mean, sd, kappa);
    case AcquisitionKind::ExpectedImprovement:
      return -expected_improvement(mean, sd, spec.f_min);
    case AcquisitionKind::ProbabilityOfImprovement:
      return -probability_of_improvement(mean, sd, spec.f_min);
    case AcquisitionKind::PureExploration: return -sd;
  }
  throw std::invalid_argument("unknown acquisition kind");
}

inline double acq_eval(const AcquisitionSpec& spec, const Prediction& pred, double kappa) {
  return acq_eval(spec, pred.mean, std::sqrt(pred.variance), kappa);
}

/// Batch slots spread the exploration weight geometrically around the scheduled
/// kappa: x1, x1/2, x2, x1/4, x4, ... clipped to [0, 10]. Slot 0 keeps the
/// schedule's value so a batch of one behaves like the plain policy.
inline double fan_kappa(double kappa, int slot) {
  if (slot < 0) throw std::invalid_argument("slot must be non-negative");
  if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
  double factor = 1.0;
  if (slot > 0) {
    const int halvings = (slot + 1) / 2;
    factor = (slot % 2 == 1) ? std::pow(0.5, halvings) : std::pow(2.0, halvings);
  }
  return std::clamp(kappa * factor, 0.0, 10.0);
}

/// Inner-search budget for the acquisition surface (and, reused in log-space,
/// for length-scale tuning).
struct SearchConfig {
  int n_starts = 0;  // 0 resolves to 8 per dimension
  int max_evals = 2000;
  double tol = 1e-9;
};

struct InfillPick {
  Vector x;
  double kappa = 0.0;  // kappa the slot searched with (0 for kappa-free kinds)
  double acq = 0.0;    // minimization-oriented acquisition value at x
};

struct InfillBatch {
  std::vector<InfillPick> picks;
};

namespace detail {

inline bool distinct_from(const Vector& x, const Matrix& X, const std::vector<Vector>& extra,
                          const std::vector<InfillPick>& picked, double radius) {
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if ((X.row(i).transpose() - x).norm() < radius) return false;
  for (const auto& p : extra)
    if ((p - x).norm() < radius) return false;
  for (const auto& p : picked)
    if ((p.x - x).norm() < radius) return false;
  return true;
}

}  // namespace detail

/// Picks `batch` distinct points minimizing the acquisition over the surrogate.
/// Slots past the first vary kappa through fan_kappa. A slot whose minimizer
/// collides with an observed, excluded, or already-picked point falls back to
/// the search's other local minima (best first), then to seeded uniform draws.
/// Deterministic in (seed, iteration): no state is carried between calls.
inline InfillBatch select_infill(const GpState& gp, const AcquisitionSpec& spec,
                                 const SearchConfig& search, int batch, const Box& bounds,
                                 int iteration, std::uint64_t seed,
                                 const std::vector<Vector>& exclusions = {}) {
  spec.validate();
  if (batch < 1) throw std::invalid_argument("batch must be at least 1");
  if (bounds.dim() != gp.dim()) throw std::invalid_argument("bounds dimension mismatch");

  const double kappa_base = next_kappa(spec.schedule, iteration);
  const bool uses_kappa = spec.kind == AcquisitionKind::LowerConfidenceBound;

  // Best assimilated point, a natural descent start for exploitation-leaning slots.
  Eigen::Index best_row = 0;
  gp.y.minCoeff(&best_row);
  const Vector incumbent = gp.X.row(best_row).transpose();

  InfillBatch out;
  out.picks.reserve(batch);

  for (int slot = 0; slot < batch; ++slot) {
    const double kappa = uses_kappa ? fan_kappa(kappa_base, slot) : 0.0;

    Objective f = [&](const Vector& x) {
      const Prediction p = gp_predict(gp, x);
      return acq_eval(spec, p.mean, std::sqrt(p.variance), kappa);
    };

    MinimizeSpec ms;
    ms.bounds = bounds;
    ms.n_starts = search.n_starts;
    ms.max_evals = search.max_evals;
    ms.tol = search.tol;
    ms.incumbent = incumbent;
    ms.seed = mix_seed(mix_seed(seed, static_cast<std::uint64_t>(iteration)),
                       static_cast<std::uint64_t>(slot));
    const MinimizeResult r = minimize(f, ms);

    InfillPick pick{r.x, kappa, r.value};
    if (!detail::distinct_from(pick.x, gp.X, exclusions, out.picks, spec.dedup_radius)) {
      bool replaced = false;
      auto alternates = r.local_minima;
      std::sort(alternates.begin(), alternates.end(),
                [](const auto& a, const auto& b) { return a.second < b.second; });
      for (const auto& [x, v] : alternates) {
        if (detail::distinct_from(x, gp.X, exclusions, out.picks, spec.dedup_radius)) {
          pick = InfillPick{x, kappa, v};
          replaced = true;
          break;
        }
      }
      if (!replaced) {
        std::mt19937_64 rng(mix_seed(ms.seed, 0x66616c6cULL));
        for (int attempt = 0; attempt < 10000 && !replaced; ++attempt) {
          Vector x = uniform_in_box(bounds, rng);
          if (detail::distinct_from(x, gp.X, exclusions, out.picks, spec.dedup_radius)) {
            pick = InfillPick{x, kappa, f(x)};
            replaced = true;
          }
        }
        if (!replaced)
          throw std::runtime_error("could not find a distinct infill point inside the bounds");
      }
    }
    out.picks.push_back(std::move(pick));
  }
  return out;
}

}  // namespace asybo

#endif  // ASYBO_ACQUISITION_HPP
