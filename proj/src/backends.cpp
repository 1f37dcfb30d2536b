#include "asybo/backends.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <utility>

#include "asybo/errors.hpp"

extern char** environ;

namespace asybo {

namespace {

std::string format_coordinate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& token, double& out) {
  if (token.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(token.c_str(), &end);
  if (errno != 0 || end != token.c_str() + token.size()) return false;
  out = v;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// InProcessBackend

InProcessBackend::InProcessBackend(ObjectiveFn f, int workers) : f_(std::move(f)) {
  if (!f_) throw std::invalid_argument("backend needs a function");
  if (workers < 0) throw std::invalid_argument("worker count must be non-negative");
  for (int i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

InProcessBackend::~InProcessBackend() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& w : workers_) w.join();
}

BackendOutcome InProcessBackend::run_function(const Vector& x) {
  try {
    const double v = f_(x);
    if (!std::isfinite(v)) return BackendOutcome::failed("function returned a non-finite value");
    return BackendOutcome::completed(v);
  } catch (const std::exception& e) {
    return BackendOutcome::failed(e.what());
  }
}

JobId InProcessBackend::submit(const Vector& x) {
  std::unique_lock<std::mutex> lock(mu_);
  const JobId id = next_id_++;
  if (workers_.empty()) {
    in_flight_ += 1;
    peak_in_flight_ = std::max(peak_in_flight_, in_flight_);
    lock.unlock();
    BackendOutcome outcome = run_function(x);
    lock.lock();
    in_flight_ -= 1;
    results_.emplace(id, std::move(outcome));
  } else {
    queue_.emplace_back(id, x);
    lock.unlock();
    cv_.notify_one();
  }
  return id;
}

BackendOutcome InProcessBackend::poll(JobId id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = results_.find(id);
  if (it == results_.end()) return BackendOutcome::not_ready();
  return it->second;
}

int InProcessBackend::peak_concurrency() const {
  std::lock_guard<std::mutex> lock(mu_);
  return peak_in_flight_;
}

void InProcessBackend::worker_loop() {
  for (;;) {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (stopping_) return;
    auto [id, x] = std::move(queue_.front());
    queue_.pop_front();
    in_flight_ += 1;
    peak_in_flight_ = std::max(peak_in_flight_, in_flight_);
    lock.unlock();

    BackendOutcome outcome = run_function(x);

    lock.lock();
    in_flight_ -= 1;
    results_.emplace(id, std::move(outcome));
  }
}

// ---------------------------------------------------------------------------
// SubprocessBackend

struct SubprocessBackend::Child {
  pid_t pid = -1;
  int out_fd = -1;
  std::string buffer;
  bool exited = false;
  int wait_status = 0;
  bool classified = false;
  BackendOutcome outcome;
};

SubprocessBackend::SubprocessBackend(std::string program, std::vector<std::string> base_args)
    : program_(std::move(program)), base_args_(std::move(base_args)) {
  if (program_.empty()) throw std::invalid_argument("program path is empty");
}

SubprocessBackend::~SubprocessBackend() {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& [id, child] : children_) {
    if (!child->exited && child->pid > 0) {
      ::kill(child->pid, SIGKILL);
      int status = 0;
      while (::waitpid(child->pid, &status, 0) < 0 && errno == EINTR) {
      }
    }
    if (child->out_fd >= 0) ::close(child->out_fd);
  }
}

JobId SubprocessBackend::submit(const Vector& x) {
  // argv[1..d] carry the coordinates; extra args follow them.
  std::vector<std::string> args;
  args.push_back(program_);
  for (Eigen::Index i = 0; i < x.size(); ++i) args.push_back(format_coordinate(x[i]));
  for (const auto& a : base_args_) args.push_back(a);

  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  int fds[2];
  if (::pipe(fds) != 0) throw TransportError(std::string("pipe: ") + std::strerror(errno));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  posix_spawn_file_actions_addclose(&actions, fds[1]);

  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, program_.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(fds[1]);
  if (rc != 0) {
    ::close(fds[0]);
    throw TransportError("could not launch " + program_ + ": " + std::strerror(rc));
  }
  ::fcntl(fds[0], F_SETFL, O_NONBLOCK);

  auto child = std::make_unique<Child>();
  child->pid = pid;
  child->out_fd = fds[0];

  std::lock_guard<std::mutex> lock(mu_);
  const JobId id = next_id_++;
  children_.emplace(id, std::move(child));
  return id;
}

namespace {

// Drains available stdout without blocking; true once the pipe reports EOF.
bool drain_pipe(int fd, std::string& buffer) {
  char chunk[4096];
  for (;;) {
    const ssize_t n = ::read(fd, chunk, sizeof(chunk));
    if (n > 0) {
      buffer.append(chunk, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) return true;
    if (errno == EINTR) continue;
    return false;  // EAGAIN: nothing more right now
  }
}

std::string final_line(const std::string& text) {
  std::string last;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    const std::string line = trim(text.substr(begin, end - begin));
    if (!line.empty()) last = line;
    if (end == text.size()) break;
    begin = end + 1;
  }
  return last;
}

}  // namespace

BackendOutcome SubprocessBackend::poll(JobId id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = children_.find(id);
  if (it == children_.end()) throw TransportError("unknown job id " + std::to_string(id));
  Child& child = *it->second;
  if (child.classified) return child.outcome;

  drain_pipe(child.out_fd, child.buffer);

  if (!child.exited) {
    int status = 0;
    pid_t r;
    while ((r = ::waitpid(child.pid, &status, WNOHANG)) < 0 && errno == EINTR) {
    }
    if (r == 0) return BackendOutcome::not_ready();
    child.exited = true;
    child.wait_status = status;
  }

  while (!drain_pipe(child.out_fd, child.buffer)) {
  }
  ::close(child.out_fd);
  child.out_fd = -1;

  if (WIFEXITED(child.wait_status) && WEXITSTATUS(child.wait_status) == 0) {
    const std::string line = final_line(child.buffer);
    double value = 0.0;
    if (line == "RETRY") {
      child.outcome = BackendOutcome::retry();
    } else if (parse_double(line, value) && std::isfinite(value)) {
      child.outcome = BackendOutcome::completed(value);
    } else {
      child.outcome =
          BackendOutcome::failed("process exited cleanly but printed no numeric result");
    }
  } else if (WIFEXITED(child.wait_status)) {
    child.outcome = BackendOutcome::failed("process exited with code " +
                                           std::to_string(WEXITSTATUS(child.wait_status)));
  } else if (WIFSIGNALED(child.wait_status)) {
    child.outcome =
        BackendOutcome::failed("process killed by signal " +
                               std::to_string(WTERMSIG(child.wait_status)));
  } else {
    child.outcome = BackendOutcome::failed("process ended abnormally");
  }
  child.classified = true;
  return child.outcome;
}

// ---------------------------------------------------------------------------
// SimulatedLatencyBackend

SimulatedLatencyBackend::SimulatedLatencyBackend(ObjectiveFn f, Clock& clock, Options options)
    : f_(std::move(f)), clock_(clock), options_(options), rng_(options.seed) {
  if (!f_) throw std::invalid_argument("backend needs a function");
  if (options_.latency_mean < 0.0) throw std::invalid_argument("latency mean must be >= 0");
  if (options_.latency_std < 0.0) throw std::invalid_argument("latency std must be >= 0");
  if (options_.fail_chance < 0.0 || options_.retry_chance < 0.0 ||
      options_.fail_chance + options_.retry_chance > 1.0)
    throw std::invalid_argument("fault chances must be non-negative and sum to at most 1");
}

double SimulatedLatencyBackend::draw_latency() {
  if (options_.latency_std == 0.0) return options_.latency_mean;
  std::normal_distribution<double> dist(options_.latency_mean, options_.latency_std);
  double d = dist(rng_);
  while (d < 0.0) d = dist(rng_);  // truncate by redrawing
  return d;
}

JobId SimulatedLatencyBackend::submit(const Vector& x) {
  Job job;
  job.ready_at = clock_.now() + draw_latency();
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  if (u < options_.fail_chance) {
    job.outcome = BackendOutcome::failed("injected failure");
  } else if (u < options_.fail_chance + options_.retry_chance) {
    job.outcome = BackendOutcome::retry("injected retry");
  } else {
    try {
      const double v = f_(x);
      job.outcome = std::isfinite(v)
                        ? BackendOutcome::completed(v)
                        : BackendOutcome::failed("function returned a non-finite value");
    } catch (const std::exception& e) {
      job.outcome = BackendOutcome::failed(e.what());
    }
  }
  const JobId id = next_id_++;
  jobs_.emplace(id, job);
  return id;
}

BackendOutcome SimulatedLatencyBackend::poll(JobId id) {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw TransportError("unknown job id " + std::to_string(id));
  if (clock_.now() < it->second.ready_at) return BackendOutcome::not_ready();
  return it->second.outcome;
}

// ---------------------------------------------------------------------------
// RemoteCommandBackend

RemoteCommandBackend::RemoteCommandBackend(CommandRunner& runner, std::string submit_command,
                                           std::string status_command)
    : runner_(runner),
      submit_command_(std::move(submit_command)),
      status_command_(std::move(status_command)) {}

JobId RemoteCommandBackend::submit(const Vector& x) {
  std::vector<std::string> argv{submit_command_};
  for (Eigen::Index i = 0; i < x.size(); ++i) argv.push_back(format_coordinate(x[i]));
  const CommandResult result = runner_.run(argv);
  if (result.exit_code != 0)
    throw TransportError("submit command failed: " + trim(result.output));

  // The job id is the last whitespace-separated token of the output.
  const std::string text = trim(result.output);
  const auto pos = text.find_last_of(" \t\n");
  const std::string token = pos == std::string::npos ? text : text.substr(pos + 1);
  char* end = nullptr;
  errno = 0;
  const unsigned long long id = std::strtoull(token.c_str(), &end, 10);
  if (errno != 0 || token.empty() || end != token.c_str() + token.size())
    throw TransportError("submit command printed no job id: " + text);
  return static_cast<JobId>(id);
}

BackendOutcome RemoteCommandBackend::poll(JobId id) {
  const CommandResult result = runner_.run({status_command_, std::to_string(id)});
  if (result.exit_code != 0)
    throw TransportError("status command failed: " + trim(result.output));

  const std::string text = trim(result.output);
  const auto split = text.find_first_of(" \t");
  const std::string head = split == std::string::npos ? text : text.substr(0, split);
  const std::string rest = split == std::string::npos ? "" : trim(text.substr(split + 1));

  if (head == "PENDING" || head == "RUNNING") return BackendOutcome::not_ready();
  if (head == "RETRY") return BackendOutcome::retry(rest);
  if (head == "FAILED") return BackendOutcome::failed(rest.empty() ? "job failed" : rest);
  if (head == "DONE") {
    double value = 0.0;
    if (!parse_double(rest, value))
      return BackendOutcome::failed("malformed DONE line: " + text);
    return BackendOutcome::completed(value);
  }
  return BackendOutcome::failed("unrecognized job state: " + text);
}

// ---------------------------------------------------------------------------
// FakeScheduler

FakeScheduler::FakeScheduler(ObjectiveFn f, Clock& clock, Options options)
    : f_(std::move(f)), clock_(clock), options_(options), rng_(options.seed) {
  if (!f_) throw std::invalid_argument("scheduler needs a function");
}

double FakeScheduler::draw(double mean, double std) {
  if (std == 0.0) return std::max(mean, 0.0);
  std::normal_distribution<double> dist(mean, std);
  double d = dist(rng_);
  while (d < 0.0) d = dist(rng_);
  return d;
}

CommandResult FakeScheduler::run(const std::vector<std::string>& argv) {
  if (argv.empty()) return {1, "no command"};

  if (argv[0] == "submit") {
    Vector x(static_cast<Eigen::Index>(argv.size()) - 1);
    for (std::size_t i = 1; i < argv.size(); ++i) {
      double v = 0.0;
      if (!parse_double(argv[i], v)) return {1, "bad coordinate: " + argv[i]};
      x[static_cast<Eigen::Index>(i - 1)] = v;
    }
    Job job;
    const double now = clock_.now();
    job.start_at = now + draw(options_.queue_mean, options_.queue_std);
    job.done_at = job.start_at + draw(options_.run_mean, options_.run_std);
    try {
      job.value = f_(x);
      job.value_ok = std::isfinite(job.value);
      if (!job.value_ok) job.reason = "non-finite value";
    } catch (const std::exception& e) {
      job.value_ok = false;
      job.reason = e.what();
    }
    const std::uint64_t id = next_id_++;
    jobs_.emplace(id, job);
    return {0, "Submitted batch job " + std::to_string(id) + "\n"};
  }

  if (argv[0] == "status") {
    if (argv.size() != 2) return {1, "usage: status <id>"};
    char* end = nullptr;
    const std::uint64_t id = std::strtoull(argv[1].c_str(), &end, 10);
    auto it = jobs_.find(id);
    if (end != argv[1].c_str() + argv[1].size() || it == jobs_.end())
      return {1, "unknown job " + argv[1]};
    const Job& job = it->second;
    const double now = clock_.now();
    if (now < job.start_at) return {0, "PENDING\n"};
    if (now < job.done_at) return {0, "RUNNING\n"};
    if (!job.value_ok) return {0, "FAILED " + job.reason + "\n"};
    char buf[64];
    std::snprintf(buf, sizeof(buf), "DONE %.17g\n", job.value);
    return {0, buf};
  }

  return {1, "unknown command: " + argv[0]};
}

}  // namespace asybo
