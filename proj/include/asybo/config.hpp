#ifndef ASYBO_CONFIG_HPP
#define ASYBO_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "asybo/acquisition.hpp"
#include "asybo/evaluator.hpp"
#include "asybo/kernel.hpp"
#include "asybo/mle.hpp"
#include "asybo/types.hpp"

namespace asybo {

enum class RunMode { Optimize, Krige };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

/// Everything a run needs, loadable from a flat key = value file.
struct RunConfig {
  RunConfig();

  RunMode mode = RunMode::Optimize;
  Box bounds = Box::unit(1);

  KernelSpec kernel;     // kernel.family, kernel.length_scale, kernel.gamma, kernel.alpha
  double jitter = 1e-10;  // kernel.jitter

  AcquisitionKind acq_kind = AcquisitionKind::LowerConfidenceBound;  // acq.family
  KappaSchedule schedule{2.5, 0.96};  // acq.kappa0, acq.decay
  int batch_k = 1;                    // acq.batch_k (run.batch_k is an alias)

  SearchConfig search;  // acqopt.n_starts, acqopt.max_evals, acqopt.tol

  bool tune_enabled = true;  // hyper.enabled
  TuneConfig tune;           // hyper.gate_n, hyper.scale_bounds, hyper.budget

  EvaluatorConfig evaluator;  // evaluator.max_simultaneous, .blocking_fraction,
                              // .max_attempts, .poll_interval_ms

  int n_init = 0;      // run.n_init; 0 resolves to max(2d, 4)
  int max_evals = 60;  // run.max_evals, total proposals including the initial design
  std::uint64_t seed = 0;            // run.seed
  std::string checkpoint_path;       // run.checkpoint_path; empty disables checkpoints
  int checkpoint_every = 1;          // run.checkpoint_every, iterations
  int surface_grid = 101;            // run.grid, per-dimension surface sample count

  int resolved_n_init() const {
    return n_init > 0 ? n_init : std::max(2 * static_cast<int>(bounds.dim()), 4);
  }

  void validate() const;
};

/// Parse flat config text: one `key = value` per line, '#' starts a comment,
/// later lines win. Throws ConfigError with the offending line number.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Build a config from entries applied in order. Unknown keys and type
/// mismatches throw ConfigError naming the key.
RunConfig config_from_entries(const std::vector<std::pair<std::string, std::string>>& entries);

/// Load a config file and apply `key=value` overrides left to right.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical echo of the effective config: every key, fixed order, parseable
/// by parse_config_text. Doubles are printed round-trip exact.
std::string config_echo(const RunConfig& config);

/// Stable hash of the echo, for checkpoint headers.
std::string config_digest(const RunConfig& config);

}  // namespace asybo

#endif  // ASYBO_CONFIG_HPP
