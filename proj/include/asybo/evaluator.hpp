#ifndef ASYBO_EVALUATOR_HPP
#define ASYBO_EVALUATOR_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "asybo/clock.hpp"
#include "asybo/types.hpp"

namespace asybo {

using JobId = std::uint64_t;

/// What a backend reports for a submitted evaluation. Value is stable once
/// returned: repeated polls of a finished job must yield the same number.
struct BackendOutcome {
  enum class Kind { ValueNotReady, Value, EvaluationFailed, EvaluateAgain };

  Kind kind = Kind::ValueNotReady;
  double value = 0.0;
  std::string message;

  static BackendOutcome not_ready() { return {}; }
  static BackendOutcome completed(double v) { return {Kind::Value, v, {}}; }
  static BackendOutcome failed(std::string why) {
    return {Kind::EvaluationFailed, 0.0, std::move(why)};
  }
  static BackendOutcome retry(std::string why = {}) {
    return {Kind::EvaluateAgain, 0.0, std::move(why)};
  }
};

/// submit starts one evaluation and must not block on its completion; poll is
/// non-blocking. Backends tolerate concurrent submit/poll across distinct ids;
/// calls for one id are serialized by the caller.
class EvaluationBackend {
 public:
  virtual ~EvaluationBackend() = default;
  virtual JobId submit(const Vector& x) = 0;
  virtual BackendOutcome poll(JobId id) = 0;
};

enum class EvalStatus {
  Queued,     // waiting for capacity, never submitted in this process
  Running,    // submitted, backend handle live
  Completed,  // value available
  Pending,    // unresolved with no live handle (e.g. restored from checkpoint)
  Failed,     // no value; reason recorded
};

inline bool resolved(EvalStatus s) {
  return s == EvalStatus::Completed || s == EvalStatus::Failed;
}

inline std::string to_string(EvalStatus s) {
  switch (s) {
    case EvalStatus::Queued: return "queued";
    case EvalStatus::Running: return "running";
    case EvalStatus::Completed: return "completed";
    case EvalStatus::Pending: return "pending";
    case EvalStatus::Failed: return "failed";
  }
  throw std::invalid_argument("unknown evaluation status");
}

inline EvalStatus eval_status_from_string(const std::string& name) {
  if (name == "queued") return EvalStatus::Queued;
  if (name == "running") return EvalStatus::Running;
  if (name == "completed") return EvalStatus::Completed;
  if (name == "pending") return EvalStatus::Pending;
  if (name == "failed") return EvalStatus::Failed;
  throw std::invalid_argument("unknown evaluation status: " + name);
}

struct EvaluationRecord {
  std::uint64_t id = 0;  // unique within a run
  Vector x;
  EvalStatus status = EvalStatus::Queued;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::string reason;  // failure detail
  double submit_time = std::numeric_limits<double>::quiet_NaN();  // first submission
  double complete_time = std::numeric_limits<double>::quiet_NaN();
  int attempts = 0;  // submissions so far

  // Driver-owned annotations, untouched by the evaluator: the iteration that
  // proposed the point and the surrogate assimilation batch it joined (-1 if
  // it never did).
  int iteration = -1;
  int batch = -1;

  // Live backend handle; meaningless across process boundaries.
  JobId job = 0;
  bool has_job = false;
};

inline EvaluationRecord make_record(std::uint64_t id, Vector x) {
  EvaluationRecord r;
  r.id = id;
  r.x = std::move(x);
  return r;
}

struct EvaluatorConfig {
  int max_simultaneous = 4;
  double blocking_fraction = 1.0;  // share of new points to resolve before returning
  int max_attempts = 3;            // submissions per point before it fails
  double poll_interval = 0.01;     // seconds between poll sweeps

  void validate() const {
    if (max_simultaneous < 1) throw std::invalid_argument("max_simultaneous must be at least 1");
    if (!(blocking_fraction >= 0.0 && blocking_fraction <= 1.0))
      throw std::invalid_argument("blocking_fraction must lie in [0, 1]");
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
    if (!(poll_interval > 0.0)) throw std::invalid_argument("poll_interval must be positive");
  }
};

/// Every input record appears in exactly one list: the multiset of points in
/// completed + pending + failed equals the multiset of new + old inputs.
struct EvaluatorReport {
  std::vector<EvaluationRecord> completed;
  std::vector<EvaluationRecord> pending;
  std::vector<EvaluationRecord> failed;
};

/// Runs new points (and carries forward old unresolved ones) against the
/// backend, at most config.max_simultaneous at a time. Returns once at least
/// ceil(blocking_fraction * |new|) of the new records are resolved; old
/// records are polled opportunistically but never waited on. A fraction of
/// 0.0 submits what capacity allows and returns without polling the new
/// points at all.
EvaluatorReport evaluate(const EvaluatorConfig& config, EvaluationBackend& backend, Clock& clock,
                         std::vector<EvaluationRecord> new_records,
                         std::vector<EvaluationRecord> old_records);

}  // namespace asybo

#endif  // ASYBO_EVALUATOR_HPP
