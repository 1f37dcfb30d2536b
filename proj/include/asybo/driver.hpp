#ifndef ASYBO_DRIVER_HPP
#define ASYBO_DRIVER_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include "asybo/backends.hpp"
#include "asybo/clock.hpp"
#include "asybo/config.hpp"
#include "asybo/evaluator.hpp"
#include "asybo/gp.hpp"
#include "asybo/types.hpp"

namespace asybo {

/// Complete run state. Coordinates inside (gp, history, pending) live in the
/// unit box; the backend sees physical points and best_x reports one.
struct RunState {
  GpState gp;  // surrogate over normalized inputs and standardized targets
  std::vector<EvaluationRecord> history;  // resolved records, event order
  std::vector<EvaluationRecord> pending;  // unresolved records

  int iteration = 0;   // completed iterations; 0 covers the initial design
  int submitted = 0;   // distinct points proposed, counted against max_evals
  std::uint64_t next_id = 0;

  int batches = 0;           // assimilation batches so far
  int last_refit_batch = -1; // batches up to here entered via one full fit

  // Target standardization, frozen after the initial design so incremental
  // factor growth stays valid.
  double y_mean = 0.0;
  double y_std = 1.0;
  bool y_stats_set = false;

  double clock_time = 0.0;  // clock reading at the last checkpoint or return
  std::mt19937_64 rng;

  Vector best_x;  // physical coordinates
  double best_value = std::numeric_limits<double>::infinity();
  bool has_best = false;
};

/// Called after each completed iteration (checkpoint already written); return
/// true to stop the run early with the state intact. Used to emulate
/// interruption in restart tests.
using StopFn = std::function<bool(const RunState&)>;

/// Full optimization loop: initial space-filling design (blocking), then
/// tune / propose / evaluate / assimilate rounds until the proposal budget is
/// spent. Points still unresolved at budget exhaustion stay in state.pending;
/// nothing waits for them.
RunState run(const RunConfig& config, EvaluationBackend& backend, Clock& clock,
             const StopFn& stop = {});

/// Continues a restored (or stopped) state to budget under the same config.
RunState resume(RunState state, const RunConfig& config, EvaluationBackend& backend, Clock& clock,
                const StopFn& stop = {});

struct SurfacePoint {
  Vector x;  // physical coordinates
  double mean = 0.0;
  double variance = 0.0;
};

struct SurfaceReport {
  std::vector<SurfacePoint> rows;  // config.surface_grid points per dimension
};

/// Posterior mean/variance on a uniform tensor grid over the bounds, in
/// physical units (standardization undone). Last dimension varies fastest.
SurfaceReport sample_surface(const RunState& state, const RunConfig& config);

struct KrigeResult {
  RunState state;
  SurfaceReport surface;
};

/// Budgeted pure-exploration run (acquisition forced to posterior sd) plus a
/// grid sample of the final surrogate.
KrigeResult krige(const RunConfig& config, EvaluationBackend& backend, Clock& clock,
                  const StopFn& stop = {});

/// One row per resolved or pending record: iteration, id, physical
/// coordinates, value, status, submit_time, complete_time.
void write_history_csv(const RunState& state, const RunConfig& config, std::ostream& out);

}  // namespace asybo

#endif  // ASYBO_DRIVER_HPP
