#include "asybo/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "asybo/acquisition.hpp"
#include "asybo/checkpoint.hpp"
#include "asybo/errors.hpp"
#include "asybo/mle.hpp"
#include "asybo/sampling.hpp"

namespace asybo {

namespace {

/// The optimization loop works in the unit box; the backend sees physical
/// coordinates.
class DenormalizingBackend final : public EvaluationBackend {
 public:
  DenormalizingBackend(EvaluationBackend& inner, const Box& bounds)
      : inner_(inner), bounds_(bounds) {}

  JobId submit(const Vector& u) override { return inner_.submit(bounds_.denormalize(u)); }
  BackendOutcome poll(JobId id) override { return inner_.poll(id); }

 private:
  EvaluationBackend& inner_;
  const Box& bounds_;
};

void update_best(RunState& s, const RunConfig& config, const EvaluationRecord& rec) {
  if (rec.status != EvalStatus::Completed) return;
  if (!s.has_best || rec.value < s.best_value) {
    s.best_value = rec.value;
    s.best_x = config.bounds.denormalize(rec.x);
    s.has_best = true;
  }
}

/// Folds one evaluate() report into the state: completed points join the
/// surrogate as a single batch, failures are logged, unresolved records stay
/// pending. Completed records are canonically ordered by id so that the
/// surrogate (and hence every later proposal) does not depend on backend
/// completion order.
void assimilate_report(RunState& s, const RunConfig& config, EvaluatorReport report) {
  std::sort(report.completed.begin(), report.completed.end(),
            [](const EvaluationRecord& a, const EvaluationRecord& b) { return a.id < b.id; });

  if (!s.y_stats_set && !report.completed.empty()) {
    double sum = 0.0;
    for (const auto& r : report.completed) sum += r.value;
    const double mean = sum / static_cast<double>(report.completed.size());
    double var = 0.0;
    for (const auto& r : report.completed) var += (r.value - mean) * (r.value - mean);
    s.y_mean = mean;
    s.y_std = std::sqrt(var / static_cast<double>(report.completed.size()));
    if (s.y_std < 1e-12) s.y_std = 1.0;
    s.y_stats_set = true;
  }

  if (!report.completed.empty()) {
    const Eigen::Index n = static_cast<Eigen::Index>(report.completed.size());
    Matrix X(n, config.bounds.dim());
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& rec = report.completed[static_cast<std::size_t>(i)];
      rec.batch = s.batches;
      X.row(i) = rec.x.transpose();
      y[i] = (rec.value - s.y_mean) / s.y_std;
    }
    if (s.gp.size() == 0) {
      s.gp = gp_fit(X, y, config.kernel, config.jitter);
      s.last_refit_batch = s.batches;
    } else {
      s.gp = gp_extend(s.gp, X, y);
    }
    s.batches += 1;
  }

  for (auto& rec : report.completed) {
    update_best(s, config, rec);
    s.history.push_back(std::move(rec));
  }
  for (auto& rec : report.failed) s.history.push_back(std::move(rec));
  s.pending = std::move(report.pending);
}

void maybe_checkpoint(const RunState& s, const RunConfig& config, bool force) {
  if (config.checkpoint_path.empty()) return;
  if (force || s.iteration % config.checkpoint_every == 0)
    write_checkpoint(s, config, config.checkpoint_path);
}

RunState loop(RunState s, const RunConfig& config, EvaluationBackend& backend, Clock& clock,
              const StopFn& stop) {
  DenormalizingBackend db(backend, config.bounds);
  const Box unit = Box::unit(config.bounds.dim());

  try {
    while (s.submitted < config.max_evals) {
      if (s.gp.size() == 0) throw std::runtime_error("no surrogate to propose from");

      if (config.tune_enabled) {
        const TuneResult tr =
            tune_length_scale(s.gp.X, s.gp.y, s.gp.kernel, config.jitter, config.tune);
        const bool scale_changed =
            tr.kernel.length_scale.size() != s.gp.kernel.length_scale.size() ||
            (tr.kernel.length_scale.array() != s.gp.kernel.length_scale.array()).any();
        if (tr.tuned && scale_changed) {
          s.gp = gp_fit(s.gp.X, s.gp.y, tr.kernel, config.jitter);
          s.last_refit_batch = s.batches - 1;
        }
      }

      AcquisitionSpec aspec;
      aspec.kind =
          config.mode == RunMode::Krige ? AcquisitionKind::PureExploration : config.acq_kind;
      aspec.schedule = config.schedule;
      aspec.f_min = s.gp.y.minCoeff();

      std::vector<Vector> exclusions;
      exclusions.reserve(s.pending.size());
      for (const auto& rec : s.pending) exclusions.push_back(rec.x);

      const int batch = std::min(config.batch_k, config.max_evals - s.submitted);
      const InfillBatch infill = select_infill(s.gp, aspec, config.search, batch, unit,
                                               s.iteration, config.seed, exclusions);

      std::vector<EvaluationRecord> new_records;
      new_records.reserve(infill.picks.size());
      for (const auto& pick : infill.picks) {
        EvaluationRecord rec = make_record(s.next_id++, pick.x);
        rec.iteration = s.iteration + 1;
        new_records.push_back(std::move(rec));
      }
      s.submitted += batch;

      EvaluatorReport report =
          evaluate(config.evaluator, db, clock, std::move(new_records), std::move(s.pending));
      assimilate_report(s, config, std::move(report));

      s.iteration += 1;
      s.clock_time = clock.now();
      maybe_checkpoint(s, config, s.submitted >= config.max_evals);
      if (stop && stop(s)) return s;
    }
  } catch (const FactorizationError&) {
    // Preserve progress for a later resume before giving up.
    maybe_checkpoint(s, config, true);
    throw;
  }
  s.clock_time = clock.now();
  return s;
}

}  // namespace

RunState run(const RunConfig& config, EvaluationBackend& backend, Clock& clock,
             const StopFn& stop) {
  config.validate();

  RunState s;
  s.rng.seed(mix_seed(config.seed, 0x696e6974ULL));

  DenormalizingBackend db(backend, config.bounds);
  const int n0 = config.resolved_n_init();
  const Matrix U = latin_hypercube(n0, config.bounds.dim(), s.rng);

  std::vector<EvaluationRecord> initial;
  initial.reserve(n0);
  for (int i = 0; i < n0; ++i) {
    EvaluationRecord rec = make_record(s.next_id++, U.row(i).transpose());
    rec.iteration = 0;
    initial.push_back(std::move(rec));
  }
  s.submitted += n0;

  // The initial design always blocks: the surrogate needs a full batch.
  EvaluatorConfig init_cfg = config.evaluator;
  init_cfg.blocking_fraction = 1.0;
  EvaluatorReport report = evaluate(init_cfg, db, clock, std::move(initial), {});
  if (report.completed.empty())
    throw std::runtime_error("initial design produced no completed evaluations");
  assimilate_report(s, config, std::move(report));

  s.clock_time = clock.now();
  maybe_checkpoint(s, config, true);
  if (stop && stop(s)) return s;

  return loop(std::move(s), config, backend, clock, stop);
}

RunState resume(RunState state, const RunConfig& config, EvaluationBackend& backend, Clock& clock,
                const StopFn& stop) {
  config.validate();
  return loop(std::move(state), config, backend, clock, stop);
}

SurfaceReport sample_surface(const RunState& state, const RunConfig& config) {
  if (state.gp.size() == 0) throw std::runtime_error("no surrogate to sample");
  const Eigen::Index d = config.bounds.dim();
  const int g = config.surface_grid;

  SurfaceReport report;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    Vector u(d);
    for (Eigen::Index k = 0; k < d; ++k)
      u[k] = static_cast<double>(idx[static_cast<std::size_t>(k)]) / (g - 1);
    const Prediction p = gp_predict(state.gp, u);
    SurfacePoint row;
    row.x = config.bounds.denormalize(u);
    row.mean = state.y_mean + state.y_std * p.mean;
    row.variance = state.y_std * state.y_std * p.variance;
    report.rows.push_back(std::move(row));

    // Odometer over the grid, last dimension fastest.
    Eigen::Index k = d - 1;
    for (;;) {
      if (++idx[static_cast<std::size_t>(k)] < g) break;
      idx[static_cast<std::size_t>(k)] = 0;
      if (k == 0) return report;
      --k;
    }
  }
}

KrigeResult krige(const RunConfig& config, EvaluationBackend& backend, Clock& clock,
                  const StopFn& stop) {
  RunConfig kc = config;
  kc.mode = RunMode::Krige;
  RunState state = run(kc, backend, clock, stop);
  SurfaceReport surface = sample_surface(state, kc);
  return {std::move(state), std::move(surface)};
}

void write_history_csv(const RunState& state, const RunConfig& config, std::ostream& out) {
  const Eigen::Index d = config.bounds.dim();
  out << "iteration,id";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x_" << (i + 1);
  out << ",value,status,submit_time,complete_time\n";

  char buf[40];
  auto num = [&buf](double v) -> std::string {
    if (std::isnan(v)) return {};
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  };

  auto emit = [&](const EvaluationRecord& rec) {
    out << rec.iteration << ',' << rec.id;
    const Vector x = config.bounds.denormalize(rec.x);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << num(x[i]);
    out << ',' << (rec.status == EvalStatus::Completed ? num(rec.value) : std::string());
    out << ',' << to_string(rec.status);
    out << ',' << num(rec.submit_time) << ',' << num(rec.complete_time) << '\n';
  };

  for (const auto& rec : state.history) emit(rec);
  for (const auto& rec : state.pending) emit(rec);
}

}  // namespace asybo
