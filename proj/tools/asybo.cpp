#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "asybo/backends.hpp"
#include "asybo/bench.hpp"
#include "asybo/checkpoint.hpp"
#include "asybo/config.hpp"
#include "asybo/driver.hpp"
#include "asybo/errors.hpp"

namespace {

namespace fs = std::filesystem;
using namespace asybo;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::string objective = "rastrigin";
  std::string command;  // non-empty switches to the subprocess backend
};

std::string resolve_output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("ASYBO_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::unique_ptr<EvaluationBackend> make_backend(const CommonOpts& opts, const RunConfig& config) {
  if (!opts.command.empty()) return std::make_unique<SubprocessBackend>(opts.command);
  const BenchmarkFn fn = make_benchmark(benchmark_from_string(opts.objective), config.bounds.dim());
  ObjectiveFn f = [fn](const Vector& x) { return bench_eval(fn, x); };
  return std::make_unique<InProcessBackend>(std::move(f), 0);
}

void write_summary(const fs::path& dir, const RunConfig& config, const RunState& state,
                   double wall_seconds, const std::string& extra = {}) {
  std::ofstream out(dir / "summary.txt");
  out << "# effective configuration\n" << config_echo(config) << "\n# result\n";
  if (state.has_best) {
    out << "best_x =";
    for (Eigen::Index i = 0; i < state.best_x.size(); ++i) out << ' ' << num(state.best_x[i]);
    out << "\nbest_value = " << num(state.best_value) << '\n';
  } else {
    out << "best_x =\nbest_value =\n";
  }
  int completed = 0, failed = 0;
  for (const auto& rec : state.history) {
    if (rec.status == EvalStatus::Completed) ++completed;
    if (rec.status == EvalStatus::Failed) ++failed;
  }
  out << "completed = " << completed << '\n';
  out << "failed = " << failed << '\n';
  out << "pending = " << state.pending.size() << '\n';
  out << "wall_time_seconds = " << num(wall_seconds) << '\n';
  if (!extra.empty()) out << extra;
}

void write_history(const fs::path& dir, const RunConfig& config, const RunState& state) {
  std::ofstream out(dir / "history.csv");
  write_history_csv(state, config, out);
}

void write_surface(const fs::path& dir, const SurfaceReport& surface, Eigen::Index dim) {
  std::ofstream out(dir / "surface.csv");
  for (Eigen::Index i = 0; i < dim; ++i) out << "x_" << (i + 1) << ',';
  out << "mean,variance\n";
  for (const auto& p : surface.rows) {
    for (Eigen::Index i = 0; i < p.x.size(); ++i) out << num(p.x[i]) << ',';
    out << num(p.mean) << ',' << num(p.variance) << '\n';
  }
}

int run_optimize(const CommonOpts& opts, bool krige_mode) {
  RunConfig config = load_config(opts.config_path, opts.overrides);
  config.mode = krige_mode ? RunMode::Krige : RunMode::Optimize;

  const fs::path dir = resolve_output_dir(opts.output_dir);
  fs::create_directories(dir);
  if (config.checkpoint_path.empty()) config.checkpoint_path = (dir / "run.ckpt").string();
  config.validate();

  auto backend = make_backend(opts, config);
  RealClock clock;
  const auto t0 = std::chrono::steady_clock::now();

  if (krige_mode) {
    KrigeResult result = krige(config, *backend, clock);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_history(dir, config, result.state);
    write_surface(dir, result.surface, config.bounds.dim());
    write_summary(dir, config, result.state, wall);
  } else {
    RunState state = run(config, *backend, clock);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_history(dir, config, state);
    write_summary(dir, config, state, wall);
  }
  return 0;
}

int run_resume(const CommonOpts& opts, const std::string& checkpoint_path) {
  if (!fs::exists(checkpoint_path))
    throw ConfigError("cannot open checkpoint file: " + checkpoint_path);
  RestoredRun restored = restore_checkpoint(checkpoint_path);
  RunConfig config = restored.config;
  if (config.checkpoint_path.empty()) config.checkpoint_path = checkpoint_path;

  const fs::path dir = resolve_output_dir(opts.output_dir);
  fs::create_directories(dir);

  auto backend = make_backend(opts, config);
  RealClock clock;
  const auto t0 = std::chrono::steady_clock::now();
  RunState state = resume(std::move(restored.state), config, *backend, clock);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_history(dir, config, state);
  if (config.mode == RunMode::Krige) write_surface(dir, sample_surface(state, config), config.bounds.dim());
  write_summary(dir, config, state, wall);
  return 0;
}

int run_async_study(const CommonOpts& opts, TimingStudyConfig study) {
  RunConfig config = load_config(opts.config_path, opts.overrides);
  study.batch_k = config.batch_k;
  study.max_simultaneous = config.evaluator.max_simultaneous;
  study.max_evals = config.max_evals;
  study.seed = config.seed;
  study.poll_interval = config.evaluator.poll_interval;
  study.validate();

  const fs::path dir = resolve_output_dir(opts.output_dir);
  fs::create_directories(dir);

  const auto t0 = std::chrono::steady_clock::now();
  TimingStudyResult result = run_timing_study(study);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ofstream out(dir / "timing.csv");
    write_timing_csv(result, out);
  }
  std::ostringstream extra;
  extra << "# per-fraction mean total time\n";
  for (const auto& s : result.summary)
    extra << "fraction_" << num(s.fraction) << "_mean = " << num(s.mean) << '\n';
  write_summary(dir, config, RunState{}, wall, extra.str());
  return 0;
}

int run_infill(const CommonOpts& opts, const std::vector<int>& ks) {
  RunConfig config = load_config(opts.config_path, opts.overrides);
  const BenchmarkFn fn = make_benchmark(benchmark_from_string(opts.objective), config.bounds.dim());

  const fs::path dir = resolve_output_dir(opts.output_dir);
  fs::create_directories(dir);

  const auto t0 = std::chrono::steady_clock::now();
  InfillStudyResult result = run_infill_study(fn, ks, config.max_evals, config.seed);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ofstream out(dir / "infill.csv");
    write_infill_csv(result, fn.dim, out);
  }
  std::ostringstream extra;
  extra << "# final best per batch size\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const bool last_of_k = i + 1 == result.rows.size() || result.rows[i + 1].k != result.rows[i].k;
    if (last_of_k) extra << "k_" << result.rows[i].k << "_best = " << num(result.rows[i].best_so_far) << '\n';
  }
  write_summary(dir, config, RunState{}, wall, extra.str());
  return 0;
}

void add_common(CLI::App* sub, CommonOpts& opts, bool with_config) {
  if (with_config)
    sub->add_option("--config", opts.config_path, "run configuration file")->required();
  sub->add_option("--set", opts.overrides, "config override key=value, last writer wins");
  sub->add_option("--output-dir", opts.output_dir,
                  "report directory (default $ASYBO_OUTPUT_DIR, else .)");
  sub->add_option("--objective", opts.objective,
                  "benchmark objective: rastrigin, ackley, rosenbrock, griewangk");
  sub->add_option("--command", opts.command,
                  "evaluate through this executable instead (coordinates in argv)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous Bayesian optimization runner"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string checkpoint_path;
  std::vector<int> ks{1, 4, 8};
  TimingStudyConfig study;

  CLI::App* optimize = app.add_subcommand("optimize", "minimize the objective");
  add_common(optimize, opts, true);

  CLI::App* krige_cmd = app.add_subcommand("krige", "pure-exploration surface reconstruction");
  add_common(krige_cmd, opts, true);

  CLI::App* resume_cmd = app.add_subcommand("resume", "continue from a checkpoint");
  resume_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  add_common(resume_cmd, opts, false);

  CLI::App* async_cmd = app.add_subcommand("async-study", "blocking-fraction timing study");
  add_common(async_cmd, opts, true);
  async_cmd->add_option("--latency-mean", study.latency_mean, "simulated latency mean");
  async_cmd->add_option("--latency-std", study.latency_std, "simulated latency std");
  async_cmd->add_option("--realizations", study.realizations, "runs per fraction");
  async_cmd->add_option("--fractions", study.fractions, "blocking fractions to sweep");

  CLI::App* infill_cmd = app.add_subcommand("infill-study", "batch-size comparison");
  add_common(infill_cmd, opts, true);
  infill_cmd->add_option("--ks", ks, "batch sizes to compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (app.got_subcommand(optimize)) return run_optimize(opts, false);
    if (app.got_subcommand(krige_cmd)) return run_optimize(opts, true);
    if (app.got_subcommand(resume_cmd)) return run_resume(opts, checkpoint_path);
    if (app.got_subcommand(async_cmd)) return run_async_study(opts, study);
    if (app.got_subcommand(infill_cmd)) return run_infill(opts, ks);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
