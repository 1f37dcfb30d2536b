#ifndef ASYBO_BACKENDS_HPP
#define ASYBO_BACKENDS_HPP

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "asybo/clock.hpp"
#include "asybo/evaluator.hpp"
#include "asybo/types.hpp"

namespace asybo {

using ObjectiveFn = std::function<double(const Vector&)>;

/// Evaluates a plain function. With zero worker threads the value is computed
/// inside submit (fully synchronous, deterministic); with workers, submissions
/// are queued and polled like any remote job.
class InProcessBackend final : public EvaluationBackend {
 public:
  explicit InProcessBackend(ObjectiveFn f, int workers = 0);
  ~InProcessBackend() override;

  InProcessBackend(const InProcessBackend&) = delete;
  InProcessBackend& operator=(const InProcessBackend&) = delete;

  JobId submit(const Vector& x) override;
  BackendOutcome poll(JobId id) override;

  /// Largest number of evaluations ever in flight at once (cap assertions).
  int peak_concurrency() const;

 private:
  void worker_loop();
  BackendOutcome run_function(const Vector& x);

  ObjectiveFn f_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<JobId, Vector>> queue_;
  std::map<JobId, BackendOutcome> results_;
  std::vector<std::thread> workers_;
  JobId next_id_ = 1;
  int in_flight_ = 0;
  int peak_in_flight_ = 0;
  bool stopping_ = false;
};

/// One OS process per evaluation. The child receives the point as decimal
/// coordinates in argv[1..d] and reports through its exit status and stdout:
/// exit 0 with a finite decimal on the final line is a value, exit 0 with the
/// literal final line "RETRY" asks for resubmission, any nonzero exit fails
/// the point.
class SubprocessBackend final : public EvaluationBackend {
 public:
  explicit SubprocessBackend(std::string program, std::vector<std::string> base_args = {});
  ~SubprocessBackend() override;

  SubprocessBackend(const SubprocessBackend&) = delete;
  SubprocessBackend& operator=(const SubprocessBackend&) = delete;

  JobId submit(const Vector& x) override;
  BackendOutcome poll(JobId id) override;

 private:
  struct Child;

  std::string program_;
  std::vector<std::string> base_args_;
  std::mutex mu_;
  std::map<JobId, std::unique_ptr<Child>> children_;
  JobId next_id_ = 1;
};

/// Wraps a function with a per-job delay drawn from normal(mean, std) truncated
/// at zero (negatives are redrawn). Time comes from the injected Clock, so a
/// VirtualClock makes whole latency studies run in milliseconds. fail_chance
/// and retry_chance inject faults for robustness tests.
class SimulatedLatencyBackend final : public EvaluationBackend {
 public:
  struct Options {
    double latency_mean = 100.0;
    double latency_std = 25.0;
    double fail_chance = 0.0;
    double retry_chance = 0.0;
    std::uint64_t seed = 0;
  };

  SimulatedLatencyBackend(ObjectiveFn f, Clock& clock, Options options);

  JobId submit(const Vector& x) override;
  BackendOutcome poll(JobId id) override;

 private:
  struct Job {
    double ready_at = 0.0;
    BackendOutcome outcome;
  };

  double draw_latency();

  ObjectiveFn f_;
  Clock& clock_;
  Options options_;
  std::mt19937_64 rng_;
  std::map<JobId, Job> jobs_;
  JobId next_id_ = 1;
};

/// Transport seam for cluster-style schedulers: submission and status checks
/// are commands executed by an injected runner. Only the fake in-process
/// runner ships here; a real remote transport would implement CommandRunner.
struct CommandResult {
  int exit_code = 0;
  std::string output;
};

class CommandRunner {
 public:
  virtual ~CommandRunner() = default;
  virtual CommandResult run(const std::vector<std::string>& argv) = 0;
};

/// submit: runner gets {submit_command, x_1, ..., x_d} and must print a line
/// ending in an integer job id. poll: runner gets {status_command, id} and
/// must print one of "PENDING", "RUNNING", "DONE <value>", "FAILED <reason>",
/// "RETRY".
class RemoteCommandBackend final : public EvaluationBackend {
 public:
  RemoteCommandBackend(CommandRunner& runner, std::string submit_command,
                       std::string status_command);

  JobId submit(const Vector& x) override;
  BackendOutcome poll(JobId id) override;

 private:
  CommandRunner& runner_;
  std::string submit_command_;
  std::string status_command_;
};

/// In-process stand-in for a batch scheduler: jobs sit in a queue for a seeded
/// random wait, then "run" for another, then expose f(x) through the status
/// command. Understands the RemoteCommandBackend command shapes.
class FakeScheduler final : public CommandRunner {
 public:
  struct Options {
    double queue_mean = 5.0;
    double queue_std = 2.0;
    double run_mean = 20.0;
    double run_std = 5.0;
    std::uint64_t seed = 0;
  };

  FakeScheduler(ObjectiveFn f, Clock& clock, Options options);

  CommandResult run(const std::vector<std::string>& argv) override;

 private:
  struct Job {
    double start_at = 0.0;
    double done_at = 0.0;
    double value = 0.0;
    bool value_ok = false;
    std::string reason;
  };

  double draw(double mean, double std);

  ObjectiveFn f_;
  Clock& clock_;
  Options options_;
  std::mt19937_64 rng_;
  std::map<std::uint64_t, Job> jobs_;
  std::uint64_t next_id_ = 1;
};

}  // namespace asybo

#endif  // ASYBO_BACKENDS_HPP
