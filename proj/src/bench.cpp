#include "asybo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "asybo/backends.hpp"
#include "asybo/config.hpp"
#include "asybo/driver.hpp"
#include "asybo/sampling.hpp"

namespace asybo {

namespace {

double domain_halfwidth(BenchmarkName name) {
  switch (name) {
    case BenchmarkName::Rastrigin: return 12.0;
    case BenchmarkName::Ackley: return 32.768;
    case BenchmarkName::Rosenbrock: return 5.0;  // asymmetric, handled below
    case BenchmarkName::Griewangk: return 600.0;
  }
  throw std::invalid_argument("unknown benchmark");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(BenchmarkName name) {
  switch (name) {
    case BenchmarkName::Rastrigin: return "rastrigin";
    case BenchmarkName::Ackley: return "ackley";
    case BenchmarkName::Rosenbrock: return "rosenbrock";
    case BenchmarkName::Griewangk: return "griewangk";
  }
  throw std::invalid_argument("unknown benchmark");
}

BenchmarkName benchmark_from_string(const std::string& name) {
  if (name == "rastrigin") return BenchmarkName::Rastrigin;
  if (name == "ackley") return BenchmarkName::Ackley;
  if (name == "rosenbrock") return BenchmarkName::Rosenbrock;
  if (name == "griewangk") return BenchmarkName::Griewangk;
  throw std::invalid_argument("unknown benchmark function '" + name + "'");
}

BenchmarkFn make_benchmark(BenchmarkName name, Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("benchmark dimension must be positive");
  if (name == BenchmarkName::Rosenbrock && dim < 2)
    throw std::invalid_argument("rosenbrock needs at least two dimensions");

  BenchmarkFn fn;
  fn.name = name;
  fn.dim = dim;
  if (name == BenchmarkName::Rosenbrock) {
    fn.domain = Box(Vector::Constant(dim, -5.0), Vector::Constant(dim, 10.0));
    fn.true_optimum = Vector::Ones(dim);
  } else {
    const double w = domain_halfwidth(name);
    fn.domain = Box(Vector::Constant(dim, -w), Vector::Constant(dim, w));
    fn.true_optimum = Vector::Zero(dim);
  }
  fn.true_value = 0.0;
  return fn;
}

double bench_eval(const BenchmarkFn& fn, const Vector& x) {
  if (x.size() != fn.dim)
    throw std::invalid_argument("point dimension " + std::to_string(x.size()) +
                                " does not match benchmark dimension " + std::to_string(fn.dim));
  if (!fn.domain.contains(x)) throw std::invalid_argument("point is outside the benchmark domain");

  const Eigen::Index d = fn.dim;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  switch (fn.name) {
    case BenchmarkName::Rastrigin: {
      double s = 10.0 * static_cast<double>(d);
      for (Eigen::Index i = 0; i < d; ++i) s += x[i] * x[i] - 10.0 * std::cos(two_pi * x[i]);
      return s;
    }
    case BenchmarkName::Ackley: {
      const double a = 20.0, b = 0.2;
      double sq = 0.0, co = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        sq += x[i] * x[i];
        co += std::cos(two_pi * x[i]);
      }
      const double n = static_cast<double>(d);
      return -a * std::exp(-b * std::sqrt(sq / n)) - std::exp(co / n) + a + std::numbers::e;
    }
    case BenchmarkName::Rosenbrock: {
      double s = 0.0;
      for (Eigen::Index i = 0; i + 1 < d; ++i) {
        const double t = x[i + 1] - x[i] * x[i];
        s += 100.0 * t * t + (1.0 - x[i]) * (1.0 - x[i]);
      }
      return s;
    }
    case BenchmarkName::Griewangk: {
      double s = 1.0, p = 1.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        s += x[i] * x[i] / 4000.0;
        p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
      }
      return s - p;
    }
  }
  throw std::invalid_argument("unknown benchmark");
}

void TimingStudyConfig::validate() const {
  if (realizations < 1) throw std::invalid_argument("realizations must be at least 1");
  if (fractions.empty()) throw std::invalid_argument("fractions must be non-empty");
  for (double f : fractions)
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("fractions must lie in [0, 1]");
  if (latency_mean < 0.0 || latency_std < 0.0)
    throw std::invalid_argument("latency parameters must be non-negative");
  if (batch_k < 1 || max_simultaneous < 1 || max_evals < 1)
    throw std::invalid_argument("batch_k, max_simultaneous, max_evals must be positive");
  if (poll_interval <= 0.0) throw std::invalid_argument("poll_interval must be positive");
}

TimingStudyResult run_timing_study(const TimingStudyConfig& cfg) {
  cfg.validate();

  const BenchmarkFn fn = make_benchmark(BenchmarkName::Rastrigin, 2);
  ObjectiveFn objective = [fn](const Vector& x) { return bench_eval(fn, x); };

  TimingStudyResult result;
  for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
    const double fraction = cfg.fractions[fi];
    TimingSummary summary;
    summary.fraction = fraction;
    double sum = 0.0, sumsq = 0.0;

    for (int r = 0; r < cfg.realizations; ++r) {
      RunConfig run_cfg;
      run_cfg.bounds = fn.domain;
      run_cfg.kernel.dim = fn.dim;
      run_cfg.batch_k = cfg.batch_k;
      run_cfg.max_evals = cfg.max_evals;
      run_cfg.tune_enabled = false;  // timing is latency-bound; tuning only burns CPU
      run_cfg.evaluator.max_simultaneous = cfg.max_simultaneous;
      run_cfg.evaluator.blocking_fraction = fraction;
      run_cfg.evaluator.poll_interval = cfg.poll_interval;
      // Seeds depend on the realization only, pairing fractions with the same
      // proposal stream and latency stream.
      run_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(r));

      VirtualClock clock;
      SimulatedLatencyBackend::Options opt;
      opt.latency_mean = cfg.latency_mean;
      opt.latency_std = cfg.latency_std;
      opt.seed = mix_seed(run_cfg.seed, 0x6c6174ULL);
      SimulatedLatencyBackend backend(objective, clock, opt);

      RunState state = run(run_cfg, backend, clock);
      const double total = state.clock_time;

      result.rows.push_back({fraction, r, total});
      sum += total;
      sumsq += total * total;
      if (r == 0) {
        summary.min = summary.max = total;
      } else {
        summary.min = std::min(summary.min, total);
        summary.max = std::max(summary.max, total);
      }
    }

    const double n = static_cast<double>(cfg.realizations);
    summary.mean = sum / n;
    const double var = std::max(0.0, sumsq / n - summary.mean * summary.mean);
    summary.stddev = std::sqrt(var);
    result.summary.push_back(summary);
  }
  return result;
}

void write_timing_csv(const TimingStudyResult& result, std::ostream& out) {
  out << "fraction,realization,total_time\n";
  for (const auto& row : result.rows)
    out << num(row.fraction) << ',' << row.realization << ',' << num(row.total_time) << '\n';
  out << "fraction,mean,std,min,max\n";
  for (const auto& s : result.summary)
    out << num(s.fraction) << ',' << num(s.mean) << ',' << num(s.stddev) << ',' << num(s.min)
        << ',' << num(s.max) << '\n';
}

InfillStudyResult run_infill_study(const BenchmarkFn& fn, const std::vector<int>& ks, int budget,
                                   std::uint64_t seed) {
  if (ks.empty()) throw std::invalid_argument("ks must be non-empty");

  ObjectiveFn objective = [fn](const Vector& x) { return bench_eval(fn, x); };

  InfillStudyResult result;
  for (int k : ks) {
    RunConfig run_cfg;
    run_cfg.bounds = fn.domain;
    run_cfg.kernel.dim = fn.dim;
    run_cfg.batch_k = k;
    run_cfg.max_evals = budget;
    run_cfg.evaluator.max_simultaneous = std::max(k, 1);
    run_cfg.seed = seed;

    VirtualClock clock;
    InProcessBackend backend(objective, 0);
    RunState state = run(run_cfg, backend, clock);

    double best = std::numeric_limits<double>::infinity();
    for (const auto& rec : state.history) {
      if (rec.status != EvalStatus::Completed) continue;
      best = std::min(best, rec.value);
      InfillRow row;
      row.k = k;
      row.iteration = rec.iteration;
      row.x = run_cfg.bounds.denormalize(rec.x);
      row.value = rec.value;
      row.best_so_far = best;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_infill_csv(const InfillStudyResult& result, Eigen::Index dim, std::ostream& out) {
  out << "k,iteration";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",x_" << (i + 1);
  out << ",value,best_so_far\n";
  for (const auto& row : result.rows) {
    out << row.k << ',' << row.iteration;
    for (Eigen::Index i = 0; i < row.x.size(); ++i) out << ',' << num(row.x[i]);
    out << ',' << num(row.value) << ',' << num(row.best_so_far) << '\n';
  }
}

}  // namespace asybo
