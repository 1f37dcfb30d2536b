#include "asybo/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "asybo/errors.hpp"
#include "asybo/gp.hpp"
#include "asybo/kernel.hpp"

namespace asybo {

namespace {

constexpr const char* kMagic = "asybo-checkpoint v1";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void bad_line(int lineno, const std::string& what) {
  throw CheckpointError("checkpoint line " + std::to_string(lineno) + ": " + what);
}

double parse_num(int lineno, std::istringstream& in, const char* field) {
  std::string tok;
  if (!(in >> tok)) bad_line(lineno, std::string("missing ") + field);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) bad_line(lineno, std::string("bad ") + field + " '" + tok + "'");
  return v;
}

long long parse_int(int lineno, std::istringstream& in, const char* field) {
  std::string tok;
  if (!(in >> tok)) bad_line(lineno, std::string("missing ") + field);
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size()) bad_line(lineno, std::string("bad ") + field + " '" + tok + "'");
  return v;
}

}  // namespace

void write_checkpoint(const RunState& state, const RunConfig& config, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint file: " + tmp);

    out << kMagic << '\n';
    out << "digest " << config_digest(config) << '\n';
    out << "dim " << config.bounds.dim() << '\n';
    out << "config-begin\n" << config_echo(config) << "config-end\n";

    auto emit = [&](const EvaluationRecord& rec) {
      // Unresolved records lose their live handles on disk.
      const EvalStatus status = resolved(rec.status) ? rec.status : EvalStatus::Pending;
      out << "record " << rec.id << ' ' << rec.iteration << ' ' << to_string(status) << ' '
          << rec.attempts << ' ' << rec.batch << ' ' << num(rec.submit_time) << ' '
          << num(rec.complete_time) << ' ' << num(rec.value);
      for (Eigen::Index i = 0; i < rec.x.size(); ++i) out << ' ' << num(rec.x[i]);
      out << '\n';
    };
    for (const auto& rec : state.history) emit(rec);
    for (const auto& rec : state.pending) emit(rec);

    out << "trailer iteration " << state.iteration << '\n';
    out << "trailer submitted " << state.submitted << '\n';
    out << "trailer next-id " << state.next_id << '\n';
    out << "trailer batches " << state.batches << '\n';
    out << "trailer last-refit-batch " << state.last_refit_batch << '\n';
    out << "trailer y-stats " << (state.y_stats_set ? 1 : 0) << ' ' << num(state.y_mean) << ' '
        << num(state.y_std) << '\n';
    out << "trailer clock " << num(state.clock_time) << '\n';
    if (state.gp.size() > 0) {
      out << "trailer length-scale";
      for (Eigen::Index i = 0; i < state.gp.kernel.length_scale.size(); ++i)
        out << ' ' << num(state.gp.kernel.length_scale[i]);
      out << '\n';
    }
    out << "trailer rng " << state.rng << '\n';
    out << "end\n";
    if (!out) throw CheckpointError("failed while writing checkpoint: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw CheckpointError("cannot move checkpoint into place: " + path);
}

RestoredRun restore_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint file: " + path);

  std::string line;
  int lineno = 0;
  auto next_line = [&](const char* expected) {
    if (!std::getline(in, line)) bad_line(lineno + 1, std::string("missing ") + expected);
    ++lineno;
  };

  next_line("header");
  if (line != kMagic) {
    if (line.rfind("asybo-checkpoint", 0) == 0)
      throw CheckpointError("unsupported checkpoint version: " + line);
    throw CheckpointError("not a checkpoint file: " + path);
  }

  next_line("digest");
  std::string digest;
  {
    std::istringstream hdr(line);
    std::string tag;
    if (!(hdr >> tag >> digest) || tag != "digest") bad_line(lineno, "expected digest line");
  }

  next_line("dimension");
  Eigen::Index dim = 0;
  {
    std::istringstream hdr(line);
    std::string tag;
    if (!(hdr >> tag >> dim) || tag != "dim" || dim < 1) bad_line(lineno, "expected dim line");
  }

  next_line("config-begin");
  if (line != "config-begin") bad_line(lineno, "expected config-begin");
  std::string config_text;
  for (;;) {
    next_line("config-end");
    if (line == "config-end") break;
    config_text += line;
    config_text += '\n';
  }

  RunConfig config;
  try {
    config = config_from_entries(parse_config_text(config_text));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("embedded config is invalid: ") + e.what());
  }
  if (config.bounds.dim() != dim) bad_line(lineno, "config dimension disagrees with header");
  if (config_digest(config) != digest)
    throw CheckpointError("config digest mismatch, checkpoint is corrupt");

  RunState state;
  bool saw_end = false;
  bool saw_rng = false;
  Vector length_scale;

  while (std::getline(in, line)) {
    ++lineno;
    if (line == "end") {
      saw_end = true;
      break;
    }
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "record") {
      EvaluationRecord rec;
      rec.id = static_cast<std::uint64_t>(parse_int(lineno, ls, "id"));
      rec.iteration = static_cast<int>(parse_int(lineno, ls, "iteration"));
      std::string status;
      if (!(ls >> status)) bad_line(lineno, "missing status");
      try {
        rec.status = eval_status_from_string(status);
      } catch (const std::invalid_argument& e) {
        bad_line(lineno, e.what());
      }
      rec.attempts = static_cast<int>(parse_int(lineno, ls, "attempts"));
      rec.batch = static_cast<int>(parse_int(lineno, ls, "batch"));
      rec.submit_time = parse_num(lineno, ls, "submit_time");
      rec.complete_time = parse_num(lineno, ls, "complete_time");
      rec.value = parse_num(lineno, ls, "value");
      rec.x = Vector(dim);
      for (Eigen::Index i = 0; i < dim; ++i) rec.x[i] = parse_num(lineno, ls, "coordinate");
      std::string extra;
      if (ls >> extra) bad_line(lineno, "trailing token '" + extra + "'");

      if (resolved(rec.status)) {
        state.history.push_back(std::move(rec));
      } else {
        rec.status = EvalStatus::Pending;
        state.pending.push_back(std::move(rec));
      }
    } else if (tag == "trailer") {
      std::string name;
      if (!(ls >> name)) bad_line(lineno, "missing trailer name");
      if (name == "iteration") {
        state.iteration = static_cast<int>(parse_int(lineno, ls, "iteration"));
      } else if (name == "submitted") {
        state.submitted = static_cast<int>(parse_int(lineno, ls, "submitted"));
      } else if (name == "next-id") {
        state.next_id = static_cast<std::uint64_t>(parse_int(lineno, ls, "next-id"));
      } else if (name == "batches") {
        state.batches = static_cast<int>(parse_int(lineno, ls, "batches"));
      } else if (name == "last-refit-batch") {
        state.last_refit_batch = static_cast<int>(parse_int(lineno, ls, "last-refit-batch"));
      } else if (name == "y-stats") {
        state.y_stats_set = parse_int(lineno, ls, "y-stats flag") != 0;
        state.y_mean = parse_num(lineno, ls, "y mean");
        state.y_std = parse_num(lineno, ls, "y std");
      } else if (name == "clock") {
        state.clock_time = parse_num(lineno, ls, "clock");
      } else if (name == "length-scale") {
        std::vector<double> v;
        double x = 0.0;
        std::string tok;
        while (ls >> tok) {
          char* end = nullptr;
          x = std::strtod(tok.c_str(), &end);
          if (end != tok.c_str() + tok.size()) bad_line(lineno, "bad length scale '" + tok + "'");
          v.push_back(x);
        }
        if (v.empty()) bad_line(lineno, "empty length scale");
        length_scale = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
      } else if (name == "rng") {
        if (!(ls >> state.rng)) bad_line(lineno, "bad rng state");
        saw_rng = true;
      } else {
        bad_line(lineno, "unknown trailer '" + name + "'");
      }
    } else {
      bad_line(lineno, "unrecognized line");
    }
  }
  if (!saw_end) throw CheckpointError("checkpoint is truncated (missing end marker)");
  if (!saw_rng) throw CheckpointError("checkpoint is missing its rng trailer");

  // Rebuild the surrogate by replaying assimilation batches: everything up to
  // the last full refit in one fit, later batches as incremental extensions.
  // This reproduces the live factor bit for bit.
  std::map<int, std::vector<const EvaluationRecord*>> batches;
  for (const auto& rec : state.history)
    if (rec.batch >= 0 && rec.status == EvalStatus::Completed) batches[rec.batch].push_back(&rec);

  if (!batches.empty()) {
    if (length_scale.size() == 0)
      throw CheckpointError("checkpoint has assimilated records but no length-scale trailer");
    KernelSpec kernel = set_length_scale(config.kernel, length_scale);

    const int max_batch = batches.rbegin()->first;
    if (max_batch + 1 != state.batches)
      throw CheckpointError("assimilation batches disagree with the batches trailer");

    auto standardized = [&](const std::vector<const EvaluationRecord*>& recs, Matrix& X,
                            Vector& y) {
      X.resize(static_cast<Eigen::Index>(recs.size()), dim);
      y.resize(static_cast<Eigen::Index>(recs.size()));
      for (std::size_t i = 0; i < recs.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = recs[i]->x.transpose();
        y[static_cast<Eigen::Index>(i)] = (recs[i]->value - state.y_mean) / state.y_std;
      }
    };

    std::vector<const EvaluationRecord*> prefix;
    for (int b = 0; b <= state.last_refit_batch; ++b) {
      auto it = batches.find(b);
      if (it == batches.end()) throw CheckpointError("missing assimilation batch records");
      prefix.insert(prefix.end(), it->second.begin(), it->second.end());
    }
    Matrix X;
    Vector y;
    standardized(prefix, X, y);
    state.gp = gp_fit(X, y, kernel, config.jitter);
    for (int b = state.last_refit_batch + 1; b <= max_batch; ++b) {
      auto it = batches.find(b);
      if (it == batches.end()) throw CheckpointError("missing assimilation batch records");
      standardized(it->second, X, y);
      state.gp = gp_extend(state.gp, X, y);
    }
  }

  for (const auto& rec : state.history) {
    if (rec.status != EvalStatus::Completed) continue;
    if (!state.has_best || rec.value < state.best_value) {
      state.best_value = rec.value;
      state.best_x = config.bounds.denormalize(rec.x);
      state.has_best = true;
    }
  }

  return {std::move(state), std::move(config)};
}

}  // namespace asybo
