#ifndef ASYBO_TESTS_SCRIPTED_BACKEND_HPP
#define ASYBO_TESTS_SCRIPTED_BACKEND_HPP

// Deterministic backend driven by per-record scripts, plus the randomized
// trial harness that checks the evaluator contract: exact partition of the
// inputs, the concurrency cap, the blocking threshold, no waiting on old
// points, and the resubmission budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "asybo/clock.hpp"
#include "asybo/errors.hpp"
#include "asybo/evaluator.hpp"
#include "asybo/sampling.hpp"

namespace scripted {

struct Step {
  enum Kind { NotReady, Value, Fail, Retry, Transport } kind = NotReady;
  double value = 0.0;
};

// Successive polls consume successive steps; the last step repeats forever,
// so a script ending in NotReady or Transport never resolves.
using Script = std::vector<Step>;

inline Step not_ready() { return {Step::NotReady, 0.0}; }
inline Step value(double v) { return {Step::Value, v}; }
inline Step fail() { return {Step::Fail, 0.0}; }
inline Step retry() { return {Step::Retry, 0.0}; }
inline Step transport() { return {Step::Transport, 0.0}; }

// Records are keyed by round(x[0]); the script cursor survives resubmission,
// so a retried record picks up where its previous attempt stopped.
class ScriptedBackend final : public asybo::EvaluationBackend {
 public:
  explicit ScriptedBackend(std::vector<Script> scripts, std::vector<bool> submit_transport = {})
      : scripts_(std::move(scripts)),
        submit_transport_(std::move(submit_transport)),
        cursors_(scripts_.size(), 0),
        submissions_(scripts_.size(), 0) {
    submit_transport_.resize(scripts_.size(), false);
  }

  asybo::JobId submit(const asybo::Vector& x) override {
    const int key = static_cast<int>(std::llround(x[0]));
    if (submit_transport_.at(static_cast<std::size_t>(key)))
      throw asybo::TransportError("scripted submit outage");
    submissions_[static_cast<std::size_t>(key)] += 1;
    active_ += 1;
    peak_ = std::max(peak_, active_);
    const asybo::JobId job = next_job_++;
    jobs_[job] = key;
    return job;
  }

  asybo::BackendOutcome poll(asybo::JobId job) override {
    const auto it = jobs_.find(job);
    if (it == jobs_.end()) throw asybo::TransportError("unknown job id");
    const auto key = static_cast<std::size_t>(it->second);
    const Script& script = scripts_.at(key);
    int& cursor = cursors_[key];
    const Step step = script.at(std::min<std::size_t>(static_cast<std::size_t>(cursor),
                                                      script.size() - 1));
    cursor += 1;
    switch (step.kind) {
      case Step::NotReady:
        return asybo::BackendOutcome::not_ready();
      case Step::Transport:
        throw asybo::TransportError("scripted poll outage");
      case Step::Value:
        jobs_.erase(it);
        active_ -= 1;
        return asybo::BackendOutcome::completed(step.value);
      case Step::Fail:
        jobs_.erase(it);
        active_ -= 1;
        return asybo::BackendOutcome::failed("scripted failure");
      case Step::Retry:
        jobs_.erase(it);
        active_ -= 1;
        return asybo::BackendOutcome::retry("scripted retry");
    }
    return asybo::BackendOutcome::not_ready();
  }

  int peak() const { return peak_; }
  int submissions(int key) const { return submissions_.at(static_cast<std::size_t>(key)); }

 private:
  std::vector<Script> scripts_;
  std::vector<bool> submit_transport_;
  std::vector<int> cursors_;
  std::vector<int> submissions_;
  std::unordered_map<asybo::JobId, int> jobs_;
  asybo::JobId next_job_ = 1;
  int active_ = 0;
  int peak_ = 0;
};

struct LawTrialStats {
  int trials = 0;
  int failures = 0;
  std::string first_failure;

  void fail(const std::string& what) {
    failures += 1;
    if (first_failure.empty()) first_failure = what;
  }
};

namespace detail {

inline int threshold_of(double fraction, std::size_t n_new) {
  return static_cast<int>(std::ceil(fraction * static_cast<double>(n_new) - 1e-9));
}

struct PlannedRecord {
  Script script;
  bool submit_transport = false;
  bool stuck = false;   // script never resolves
  int retries = 0;      // Retry steps before the terminal step
  bool ends_in_value = false;
  double terminal_value = 0.0;
};

inline PlannedRecord resolving_record(std::mt19937_64& rng, int max_retries) {
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  PlannedRecord p;
  std::uniform_int_distribution<int> nr(0, 2);
  std::uniform_int_distribution<int> rt(0, max_retries);
  p.retries = rt(rng);
  for (int i = 0; i < p.retries; ++i) {
    for (int j = nr(rng); j > 0; --j) p.script.push_back(not_ready());
    p.script.push_back(retry());
  }
  for (int j = nr(rng); j > 0; --j) p.script.push_back(not_ready());
  p.ends_in_value = coin(rng) != 0;  // mostly values, some failures
  p.terminal_value = val(rng);
  p.script.push_back(p.ends_in_value ? value(p.terminal_value) : fail());
  return p;
}

inline PlannedRecord stuck_record(std::mt19937_64& rng) {
  PlannedRecord p;
  p.stuck = true;
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> nr(0, 2);
  for (int j = nr(rng); j > 0; --j) p.script.push_back(not_ready());
  p.script.push_back(coin(rng) ? not_ready() : transport());
  return p;
}

inline std::vector<std::uint64_t> ids_of(const std::vector<asybo::EvaluationRecord>& rs) {
  std::vector<std::uint64_t> ids;
  for (const auto& r : rs) ids.push_back(r.id);
  return ids;
}

inline const asybo::EvaluationRecord* find_id(const asybo::EvaluatorReport& rep,
                                              std::uint64_t id) {
  for (const auto& r : rep.completed)
    if (r.id == id) return &r;
  for (const auto& r : rep.failed)
    if (r.id == id) return &r;
  for (const auto& r : rep.pending)
    if (r.id == id) return &r;
  return nullptr;
}

inline bool in_bucket(const std::vector<asybo::EvaluationRecord>& bucket, std::uint64_t id) {
  for (const auto& r : bucket)
    if (r.id == id) return true;
  return false;
}

// Randomized mixed trial: stuck old points in the pool, blocking fraction
// anywhere in [0, 1]. Checks partition, cap, threshold, and never-wait.
inline void chaos_trial(std::uint64_t seed, LawTrialStats& stats) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_new_d(1, 8);
  std::uniform_int_distribution<int> n_old_d(1, 6);
  std::uniform_int_distribution<int> attempts_d(1, 4);
  const double fractions[] = {0.0, 0.25, 0.5, 0.6, 0.75, 1.0};

  const int n_new = (seed % 19 == 0) ? 0 : n_new_d(rng);
  const int n_old = n_old_d(rng);
  asybo::EvaluatorConfig cfg;
  cfg.blocking_fraction = fractions[rng() % 6];
  cfg.max_attempts = attempts_d(rng);
  cfg.poll_interval = 0.5;
  const int threshold = threshold_of(cfg.blocking_fraction, static_cast<std::size_t>(n_new));

  std::vector<PlannedRecord> plan;
  // New points: a few may be stuck, but at least `threshold` must resolve.
  int resolvable = 0;
  for (int i = 0; i < n_new; ++i) {
    const bool stuck = (rng() % 8 == 0);
    plan.push_back(stuck ? stuck_record(rng) : resolving_record(rng, cfg.max_attempts + 1));
    if (!stuck) ++resolvable;
  }
  for (int i = 0; resolvable < threshold && i < n_new; ++i) {
    if (plan[static_cast<std::size_t>(i)].stuck) {
      plan[static_cast<std::size_t>(i)] = resolving_record(rng, cfg.max_attempts + 1);
      ++resolvable;
    }
  }
  int stuck_new = 0;
  for (int i = 0; i < n_new; ++i)
    if (plan[static_cast<std::size_t>(i)].stuck) ++stuck_new;
  // Old points: always at least one that never resolves.
  int stuck_old = 0;
  for (int i = 0; i < n_old; ++i) {
    const bool stuck = (i == 0) || (rng() % 2 == 0);
    plan.push_back(stuck ? stuck_record(rng) : resolving_record(rng, cfg.max_attempts + 1));
    if (stuck) ++stuck_old;
  }
  // A couple of new points may die on submit.
  std::vector<bool> submit_transport(plan.size(), false);
  if (n_new > 0 && rng() % 4 == 0) {
    const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n_new));
    if (!plan[static_cast<std::size_t>(k)].stuck) submit_transport[static_cast<std::size_t>(k)] = true;
  }

  // The cap must exceed the stuck jobs or a positive threshold can never be
  // met; that starvation is a caller error, not an evaluator one.
  const int floor_cap = (threshold > 0) ? stuck_new + stuck_old + 1 : 1;
  std::uniform_int_distribution<int> cap_d(floor_cap, floor_cap + 5);
  cfg.max_simultaneous = cap_d(rng);

  std::vector<Script> scripts;
  for (const auto& p : plan) scripts.push_back(p.script);
  ScriptedBackend backend(scripts, submit_transport);
  asybo::VirtualClock clock;

  std::vector<asybo::EvaluationRecord> new_records;
  std::vector<asybo::EvaluationRecord> old_records;
  for (int i = 0; i < n_new; ++i) {
    auto r = asybo::make_record(1000 + static_cast<std::uint64_t>(i),
                                asybo::Vector::Constant(1, static_cast<double>(i)));
    new_records.push_back(std::move(r));
  }
  // Old points arrive either with a live backend handle or queued from a
  // previous call that ran out of capacity.
  for (int i = 0; i < n_old; ++i) {
    const int key = n_new + i;
    auto r = asybo::make_record(2000 + static_cast<std::uint64_t>(i),
                                asybo::Vector::Constant(1, static_cast<double>(key)));
    const bool live = !submit_transport[static_cast<std::size_t>(key)] && (rng() % 2 == 0);
    if (live) {
      r.job = backend.submit(r.x);
      r.has_job = true;
      r.status = asybo::EvalStatus::Running;
      r.submit_time = clock.now();
      r.attempts = 1;
    }
    old_records.push_back(std::move(r));
  }

  auto all_ids = ids_of(new_records);
  for (const auto& r : old_records) all_ids.push_back(r.id);

  const auto report = asybo::evaluate(cfg, backend, clock, new_records, old_records);

  // Law: exact partition of inputs across the three buckets.
  std::vector<std::uint64_t> out_ids;
  for (const auto& r : report.completed) out_ids.push_back(r.id);
  for (const auto& r : report.pending) out_ids.push_back(r.id);
  for (const auto& r : report.failed) out_ids.push_back(r.id);
  auto sorted_in = all_ids;
  auto sorted_out = out_ids;
  std::sort(sorted_in.begin(), sorted_in.end());
  std::sort(sorted_out.begin(), sorted_out.end());
  if (sorted_in != sorted_out) {
    stats.fail("partition law: report ids differ from input ids");
    return;
  }

  // Law: never more than max_simultaneous in flight.
  if (backend.peak() > cfg.max_simultaneous) {
    std::ostringstream os;
    os << "cap law: peak " << backend.peak() << " > " << cfg.max_simultaneous;
    stats.fail(os.str());
    return;
  }

  // Law: at least ceil(fraction * n_new) new records resolved on return.
  int resolved_new = 0;
  for (int i = 0; i < n_new; ++i) {
    const std::uint64_t id = 1000 + static_cast<std::uint64_t>(i);
    if (in_bucket(report.completed, id) || in_bucket(report.failed, id)) ++resolved_new;
  }
  if (resolved_new < threshold) {
    std::ostringstream os;
    os << "threshold law: resolved " << resolved_new << " of " << n_new << " new, needed "
       << threshold;
    stats.fail(os.str());
    return;
  }
  // With a zero fraction nothing new may be polled: only submit-time
  // transport deaths can resolve.
  if (cfg.blocking_fraction == 0.0) {
    for (int i = 0; i < n_new; ++i) {
      const std::uint64_t id = 1000 + static_cast<std::uint64_t>(i);
      const bool died_on_submit = submit_transport[static_cast<std::size_t>(i)];
      if (!died_on_submit && !in_bucket(report.pending, id)) {
        stats.fail("zero-fraction law: a new record was resolved");
        return;
      }
    }
  }

  // Law: old records that never resolve must not block the return.
  for (int i = 0; i < n_old; ++i) {
    const std::size_t key = static_cast<std::size_t>(n_new + i);
    if (!plan[key].stuck) continue;
    const std::uint64_t id = 2000 + static_cast<std::uint64_t>(i);
    if (!in_bucket(report.pending, id)) {
      stats.fail("never-wait law: a stuck old record left the pending bucket");
      return;
    }
  }
}

// Clean trial: blocking fraction 1.0, every script resolves, no transport
// faults. Pins down the exact resubmission count for retried records.
inline void clean_trial(std::uint64_t seed, LawTrialStats& stats) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_new_d(1, 8);
  std::uniform_int_distribution<int> n_old_d(0, 4);
  std::uniform_int_distribution<int> attempts_d(1, 4);
  std::uniform_int_distribution<int> cap_d(1, 6);

  const int n_new = n_new_d(rng);
  const int n_old = n_old_d(rng);
  asybo::EvaluatorConfig cfg;
  cfg.blocking_fraction = 1.0;
  cfg.max_attempts = attempts_d(rng);
  cfg.max_simultaneous = cap_d(rng);
  cfg.poll_interval = 0.5;

  std::vector<PlannedRecord> plan;
  for (int i = 0; i < n_new + n_old; ++i)
    plan.push_back(resolving_record(rng, cfg.max_attempts + 1));

  std::vector<Script> scripts;
  for (const auto& p : plan) scripts.push_back(p.script);
  ScriptedBackend backend(scripts);
  asybo::VirtualClock clock;

  std::vector<asybo::EvaluationRecord> new_records;
  std::vector<asybo::EvaluationRecord> old_records;
  for (int i = 0; i < n_new; ++i)
    new_records.push_back(asybo::make_record(1000 + static_cast<std::uint64_t>(i),
                                             asybo::Vector::Constant(1, static_cast<double>(i))));
  for (int i = 0; i < n_old; ++i) {
    auto r = asybo::make_record(2000 + static_cast<std::uint64_t>(i),
                                asybo::Vector::Constant(1, static_cast<double>(n_new + i)));
    old_records.push_back(std::move(r));  // queued old: no live handle
  }

  const auto report = asybo::evaluate(cfg, backend, clock, new_records, old_records);

  if (backend.peak() > cfg.max_simultaneous) {
    stats.fail("cap law (clean): peak above max_simultaneous");
    return;
  }

  // Every new record resolves; check status and submission count per script.
  for (int i = 0; i < n_new; ++i) {
    const std::uint64_t id = 1000 + static_cast<std::uint64_t>(i);
    const auto& p = plan[static_cast<std::size_t>(i)];
    const auto* rec = find_id(report, id);
    if (rec == nullptr) {
      stats.fail("retry law: record missing from report");
      return;
    }
    const bool within_budget = p.retries + 1 <= cfg.max_attempts;
    const int expect_submissions = std::min(p.retries + 1, cfg.max_attempts);
    if (backend.submissions(i) != expect_submissions) {
      std::ostringstream os;
      os << "retry law: record " << i << " submitted " << backend.submissions(i)
         << " times, expected " << expect_submissions << " (retries=" << p.retries
         << ", max_attempts=" << cfg.max_attempts << ")";
      stats.fail(os.str());
      return;
    }
    if (!within_budget) {
      if (rec->status != asybo::EvalStatus::Failed ||
          rec->reason.find("retry limit") == std::string::npos) {
        stats.fail("retry law: exhausted record not failed with retry-limit reason");
        return;
      }
    } else if (p.ends_in_value) {
      if (rec->status != asybo::EvalStatus::Completed || rec->value != p.terminal_value) {
        stats.fail("retry law: completed record lost its scripted value");
        return;
      }
    } else {
      if (rec->status != asybo::EvalStatus::Failed) {
        stats.fail("retry law: scripted failure not reported as failed");
        return;
      }
    }
    if (rec->attempts != expect_submissions) {
      stats.fail("retry law: record attempts counter disagrees with backend submissions");
      return;
    }
  }
}

}  // namespace detail

// Runs `trials` chaos trials and `trials` clean trials; every law is
// exercised at least `trials` times.
inline LawTrialStats run_evaluator_law_trials(int trials, std::uint64_t seed) {
  LawTrialStats stats;
  for (int t = 0; t < trials; ++t) {
    detail::chaos_trial(asybo::mix_seed(seed, static_cast<std::uint64_t>(t) * 2), stats);
    stats.trials += 1;
    detail::clean_trial(asybo::mix_seed(seed, static_cast<std::uint64_t>(t) * 2 + 1), stats);
    stats.trials += 1;
  }
  return stats;
}

}  // namespace scripted

#endif
