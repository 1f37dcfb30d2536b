#ifndef ASYBO_BENCH_HPP
#define ASYBO_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "asybo/types.hpp"

namespace asybo {

enum class BenchmarkName { Rastrigin, Ackley, Rosenbrock, Griewangk };

std::string to_string(BenchmarkName name);
BenchmarkName benchmark_from_string(const std::string& name);

/// A test function together with its conventional domain and known optimum.
struct BenchmarkFn {
  BenchmarkName name = BenchmarkName::Rastrigin;
  Eigen::Index dim = 2;
  Box domain;
  Vector true_optimum;
  double true_value = 0.0;
};

BenchmarkFn make_benchmark(BenchmarkName name, Eigen::Index dim);

/// Evaluates fn at x. x must match fn.dim and lie inside fn.domain.
double bench_eval(const BenchmarkFn& fn, const Vector& x);

/// Blocking-fraction timing study on virtual time: for each fraction, runs
/// `realizations` seeded optimizations against a simulated-latency backend and
/// records the total virtual time each took. Realizations are paired across
/// fractions (same driver and latency seeds) so fraction is the only variable.
struct TimingStudyConfig {
  double latency_mean = 100.0;
  double latency_std = 25.0;
  int realizations = 50;
  std::vector<double> fractions{0.0, 0.25, 0.5, 0.75, 1.0};
  int batch_k = 4;
  int max_simultaneous = 4;
  int max_evals = 36;
  std::uint64_t seed = 0;
  double poll_interval = 1.0;  // virtual time units

  void validate() const;
};

struct TimingRow {
  double fraction = 0.0;
  int realization = 0;
  double total_time = 0.0;
};

struct TimingSummary {
  double fraction = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct TimingStudyResult {
  std::vector<TimingRow> rows;
  std::vector<TimingSummary> summary;  // one row per fraction, input order
};

TimingStudyResult run_timing_study(const TimingStudyConfig& cfg);

/// CSV with header fraction,realization,total_time followed by one summary
/// block with header fraction,mean,std,min,max.
void write_timing_csv(const TimingStudyResult& result, std::ostream& out);

/// Batch-size comparison: one seeded optimization of fn per entry of ks, all
/// sharing the evaluation budget. Rows cover completed evaluations in
/// assimilation order with the running best.
struct InfillRow {
  int k = 0;
  int iteration = 0;
  Vector x;  // physical coordinates
  double value = 0.0;
  double best_so_far = 0.0;
};

struct InfillStudyResult {
  std::vector<InfillRow> rows;
};

InfillStudyResult run_infill_study(const BenchmarkFn& fn, const std::vector<int>& ks, int budget,
                                   std::uint64_t seed);

/// CSV with header k,iteration,x_1..x_d,value,best_so_far.
void write_infill_csv(const InfillStudyResult& result, Eigen::Index dim, std::ostream& out);

}  // namespace asybo

#endif  // ASYBO_BENCH_HPP
