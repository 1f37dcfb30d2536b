#include "asybo/evaluator.hpp"

#include <cmath>
#include <deque>
#include <utility>
#include <vector>

#include "asybo/errors.hpp"

namespace asybo {
namespace {

int resolve_threshold(double fraction, std::size_t n_new) {
  // Epsilon guards against 0.7 * 10 = 7.000000000000001 style rounding.
  const double raw = fraction * static_cast<double>(n_new);
  return static_cast<int>(std::ceil(raw - 1e-9));
}

struct Slot {
  EvaluationRecord rec;
  bool is_new = false;
};

}  // namespace

EvaluatorReport evaluate(const EvaluatorConfig& config, EvaluationBackend& backend, Clock& clock,
                         std::vector<EvaluationRecord> new_records,
                         std::vector<EvaluationRecord> old_records) {
  config.validate();

  const int threshold = resolve_threshold(config.blocking_fraction, new_records.size());
  int resolved_new = 0;

  std::vector<Slot> slots;
  slots.reserve(new_records.size() + old_records.size());
  std::deque<std::size_t> queue_new;  // awaiting submission; new points have priority
  std::deque<std::size_t> queue_old;
  std::vector<std::size_t> running;

  for (auto& r : new_records) {
    r.status = EvalStatus::Queued;
    r.has_job = false;
    r.attempts = 0;
    slots.push_back({std::move(r), true});
    queue_new.push_back(slots.size() - 1);
  }
  for (auto& r : old_records) {
    Slot s{std::move(r), false};
    const std::size_t idx = slots.size();
    if (resolved(s.rec.status)) {
      slots.push_back(std::move(s));  // already resolved, pass through
    } else if (s.rec.status == EvalStatus::Running && s.rec.has_job) {
      slots.push_back(std::move(s));
      running.push_back(idx);
    } else {
      // Queued, or unresolved with no live handle (restored state): resubmit.
      s.rec.status = EvalStatus::Queued;
      s.rec.has_job = false;
      slots.push_back(std::move(s));
      queue_old.push_back(idx);
    }
  }

  auto mark_resolved = [&](Slot& s) {
    s.rec.complete_time = clock.now();
    s.rec.has_job = false;
    if (s.is_new) ++resolved_new;
  };

  auto submit = [&](std::size_t idx) {
    Slot& s = slots[idx];
    try {
      s.rec.job = backend.submit(s.rec.x);
      s.rec.has_job = true;
      s.rec.status = EvalStatus::Running;
      s.rec.attempts += 1;
      if (std::isnan(s.rec.submit_time)) s.rec.submit_time = clock.now();
      running.push_back(idx);
    } catch (const TransportError& e) {
      s.rec.status = EvalStatus::Failed;
      s.rec.reason = std::string("transport: ") + e.what();
      mark_resolved(s);
    }
  };

  auto fill_capacity = [&]() -> int {
    int submitted = 0;
    while (running.size() < static_cast<std::size_t>(config.max_simultaneous)) {
      std::size_t idx;
      if (!queue_new.empty()) {
        idx = queue_new.front();
        queue_new.pop_front();
      } else if (!queue_old.empty()) {
        idx = queue_old.front();
        queue_old.pop_front();
      } else {
        break;
      }
      submit(idx);
      ++submitted;
    }
    return submitted;
  };

  // True when the record left the running pool (resolved or requeued).
  auto poll_one = [&](std::size_t idx) {
    Slot& s = slots[idx];
    BackendOutcome outcome;
    try {
      outcome = backend.poll(s.rec.job);
    } catch (const TransportError&) {
      return false;  // transient; try again next sweep
    }
    switch (outcome.kind) {
      case BackendOutcome::Kind::ValueNotReady:
        return false;
      case BackendOutcome::Kind::Value:
        if (!std::isfinite(outcome.value)) {
          s.rec.status = EvalStatus::Failed;
          s.rec.reason = "backend reported a non-finite value";
        } else {
          s.rec.status = EvalStatus::Completed;
          s.rec.value = outcome.value;
        }
        mark_resolved(s);
        return true;
      case BackendOutcome::Kind::EvaluationFailed:
        s.rec.status = EvalStatus::Failed;
        s.rec.reason = outcome.message.empty() ? "evaluation failed" : outcome.message;
        mark_resolved(s);
        return true;
      case BackendOutcome::Kind::EvaluateAgain:
        if (s.rec.attempts >= config.max_attempts) {
          s.rec.status = EvalStatus::Failed;
          s.rec.reason = "retry limit reached after " + std::to_string(s.rec.attempts) +
                         " attempts";
          mark_resolved(s);
        } else {
          s.rec.status = EvalStatus::Queued;
          s.rec.has_job = false;
          (s.is_new ? queue_new : queue_old).push_back(idx);
        }
        return true;
    }
    return false;
  };

  auto sweep = [&](bool old_only) -> int {
    std::vector<std::size_t> still;
    still.reserve(running.size());
    int moved = 0;
    for (std::size_t idx : running) {
      if (old_only && slots[idx].is_new) {
        still.push_back(idx);
        continue;
      }
      if (poll_one(idx)) {
        ++moved;
      } else {
        still.push_back(idx);
      }
    }
    running = std::move(still);
    return moved;
  };

  fill_capacity();
  // Old points are always given one poll, but never waited on. New points are
  // polled only once the threshold can be pursued, so a fraction of 0.0
  // returns with every new point still pending even on an instant backend.
  sweep(/*old_only=*/true);
  fill_capacity();
  while (resolved_new < threshold) {
    sweep(/*old_only=*/false);
    fill_capacity();
    if (resolved_new >= threshold) break;
    clock.sleep_for(config.poll_interval);
  }
  if (threshold > 0) {
    // Threshold met: drain whatever resolves without any waiting. Instant
    // backends finish every queued point here; slow ones exit on the first
    // quiet cycle. Keeps submission of all new points a best effort while
    // never sleeping past the blocking fraction.
    for (;;) {
      int moved = sweep(/*old_only=*/false);
      moved += fill_capacity();
      if (moved == 0) break;
    }
  } else {
    sweep(/*old_only=*/true);  // old points still get their poll at return
  }

  EvaluatorReport report;
  for (auto& s : slots) {
    switch (s.rec.status) {
      case EvalStatus::Completed: report.completed.push_back(std::move(s.rec)); break;
      case EvalStatus::Failed: report.failed.push_back(std::move(s.rec)); break;
      default: report.pending.push_back(std::move(s.rec)); break;
    }
  }
  return report;
}

}  // namespace asybo
