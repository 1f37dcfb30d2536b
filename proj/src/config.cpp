#include "asybo/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "asybo/errors.hpp"

namespace asybo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void type_error(const std::string& key, const char* expected,
                             const std::string& value) {
  throw ConfigError("config key '" + key + "' expects " + expected + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || errno != 0 || end != value.c_str() + value.size())
    type_error(key, "a number", value);
  return v;
}

long long to_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || errno != 0 || end != value.c_str() + value.size())
    type_error(key, "an integer", value);
  return v;
}

std::uint64_t to_uint64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || errno != 0 || end != value.c_str() + value.size() || value[0] == '-')
    type_error(key, "a non-negative integer", value);
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  type_error(key, "true or false", value);
}

Box to_box(const std::string& key, const std::string& value) {
  const auto tokens = split_ws(value);
  if (tokens.empty()) type_error(key, "per-dimension lo:hi pairs", value);
  Vector lo(static_cast<Eigen::Index>(tokens.size()));
  Vector hi(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto colon = tokens[i].find(':');
    if (colon == std::string::npos) type_error(key, "per-dimension lo:hi pairs", value);
    lo[static_cast<Eigen::Index>(i)] = to_double(key, tokens[i].substr(0, colon));
    hi[static_cast<Eigen::Index>(i)] = to_double(key, tokens[i].substr(colon + 1));
  }
  try {
    return Box(lo, hi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

Vector to_vector(const std::string& key, const std::string& value) {
  const auto tokens = split_ws(value);
  if (tokens.empty()) type_error(key, "one or more numbers", value);
  Vector v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = to_double(key, tokens[i]);
  return v;
}

// Shortest decimal that parses back to the same bits.
std::string format_double(double v) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

std::string format_vector(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

std::string format_box(const Box& box) {
  std::string out;
  for (Eigen::Index i = 0; i < box.dim(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(box.low[i]) + ':' + format_double(box.high[i]);
  }
  return out;
}

}  // namespace

std::string to_string(RunMode mode) {
  return mode == RunMode::Optimize ? "optimize" : "krige";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "optimize") return RunMode::Optimize;
  if (name == "krige") return RunMode::Krige;
  throw ConfigError("config key 'run.mode' expects optimize or krige, got '" + name + "'");
}

RunConfig::RunConfig() {
  kernel.length_scale = Vector::Constant(1, 0.25);  // normalized coordinates
}

void RunConfig::validate() const {
  if (bounds.dim() < 1) throw ConfigError("run.bounds must define at least one dimension");
  if (max_evals < resolved_n_init())
    throw ConfigError("run.max_evals must cover the initial design (" +
                      std::to_string(resolved_n_init()) + " points)");
  if (n_init < 0) throw ConfigError("run.n_init must be non-negative");
  if (batch_k < 1) throw ConfigError("acq.batch_k must be at least 1");
  if (checkpoint_every < 1) throw ConfigError("run.checkpoint_every must be at least 1");
  if (surface_grid < 2) throw ConfigError("run.grid must be at least 2");
  if (jitter < 0.0) throw ConfigError("kernel.jitter must be non-negative");
  if (search.n_starts < 0) throw ConfigError("acqopt.n_starts must be non-negative");
  if (search.max_evals < 1) throw ConfigError("acqopt.max_evals must be at least 1");
  if (!(search.tol > 0.0)) throw ConfigError("acqopt.tol must be positive");
  try {
    kernel.validate();
    schedule.validate();
    tune.validate();
    evaluator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    entries.emplace_back(key, value);
  }
  return entries;
}

RunConfig config_from_entries(const std::vector<std::pair<std::string, std::string>>& entries) {
  RunConfig c;
  for (const auto& [key, value] : entries) {
    if (key == "run.mode") {
      c.mode = run_mode_from_string(value);
    } else if (key == "run.bounds") {
      c.bounds = to_box(key, value);
    } else if (key == "run.n_init") {
      c.n_init = static_cast<int>(to_int(key, value));
    } else if (key == "run.batch_k" || key == "acq.batch_k") {
      c.batch_k = static_cast<int>(to_int(key, value));
    } else if (key == "run.max_evals") {
      c.max_evals = static_cast<int>(to_int(key, value));
    } else if (key == "run.seed") {
      c.seed = to_uint64(key, value);
    } else if (key == "run.checkpoint_path") {
      c.checkpoint_path = value;
    } else if (key == "run.checkpoint_every") {
      c.checkpoint_every = static_cast<int>(to_int(key, value));
    } else if (key == "run.grid") {
      c.surface_grid = static_cast<int>(to_int(key, value));
    } else if (key == "kernel.family") {
      try {
        c.kernel.family = kernel_family_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config key 'kernel.family': ") + e.what());
      }
    } else if (key == "kernel.length_scale") {
      c.kernel.length_scale = to_vector(key, value);
    } else if (key == "kernel.gamma") {
      c.kernel.gamma = to_double(key, value);
    } else if (key == "kernel.alpha") {
      c.kernel.alpha = to_double(key, value);
    } else if (key == "kernel.jitter") {
      c.jitter = to_double(key, value);
    } else if (key == "acq.family") {
      try {
        c.acq_kind = acquisition_kind_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config key 'acq.family': ") + e.what());
      }
    } else if (key == "acq.kappa0") {
      c.schedule.kappa0 = to_double(key, value);
    } else if (key == "acq.decay") {
      c.schedule.decay = to_double(key, value);
    } else if (key == "acqopt.n_starts") {
      c.search.n_starts = static_cast<int>(to_int(key, value));
    } else if (key == "acqopt.max_evals") {
      c.search.max_evals = static_cast<int>(to_int(key, value));
    } else if (key == "acqopt.tol") {
      c.search.tol = to_double(key, value);
    } else if (key == "hyper.enabled") {
      c.tune_enabled = to_bool(key, value);
    } else if (key == "hyper.gate_n") {
      c.tune.gate = static_cast<int>(to_int(key, value));
    } else if (key == "hyper.scale_bounds") {
      const Vector b = to_vector(key, value);
      if (b.size() != 2) type_error(key, "two numbers (lo hi)", value);
      c.tune.scale_lo = b[0];
      c.tune.scale_hi = b[1];
    } else if (key == "hyper.budget") {
      c.tune.budget = static_cast<int>(to_int(key, value));
    } else if (key == "evaluator.max_simultaneous") {
      c.evaluator.max_simultaneous = static_cast<int>(to_int(key, value));
    } else if (key == "evaluator.blocking_fraction") {
      c.evaluator.blocking_fraction = to_double(key, value);
    } else if (key == "evaluator.max_attempts") {
      c.evaluator.max_attempts = static_cast<int>(to_int(key, value));
    } else if (key == "evaluator.poll_interval_ms") {
      c.evaluator.poll_interval = to_double(key, value) / 1000.0;
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }

  c.kernel.dim = static_cast<int>(c.bounds.dim());
  if (c.kernel.length_scale.size() != 1 && c.kernel.length_scale.size() != c.bounds.dim())
    throw ConfigError("kernel.length_scale needs 1 value or one per dimension");
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();

  auto entries = parse_config_text(buffer.str());
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + o + "' is not of the form key=value");
    entries.emplace_back(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  return config_from_entries(entries);
}

std::string config_echo(const RunConfig& c) {
  std::ostringstream out;
  out << "run.mode = " << to_string(c.mode) << '\n';
  out << "run.bounds = " << format_box(c.bounds) << '\n';
  out << "run.n_init = " << c.n_init << '\n';
  out << "run.batch_k = " << c.batch_k << '\n';
  out << "run.max_evals = " << c.max_evals << '\n';
  out << "run.seed = " << c.seed << '\n';
  out << "run.checkpoint_path = " << c.checkpoint_path << '\n';
  out << "run.checkpoint_every = " << c.checkpoint_every << '\n';
  out << "run.grid = " << c.surface_grid << '\n';
  out << "kernel.family = " << to_string(c.kernel.family) << '\n';
  out << "kernel.length_scale = " << format_vector(c.kernel.length_scale) << '\n';
  out << "kernel.gamma = " << format_double(c.kernel.gamma) << '\n';
  out << "kernel.alpha = " << format_double(c.kernel.alpha) << '\n';
  out << "kernel.jitter = " << format_double(c.jitter) << '\n';
  out << "acq.family = " << to_string(c.acq_kind) << '\n';
  out << "acq.kappa0 = " << format_double(c.schedule.kappa0) << '\n';
  out << "acq.decay = " << format_double(c.schedule.decay) << '\n';
  out << "acqopt.n_starts = " << c.search.n_starts << '\n';
  out << "acqopt.max_evals = " << c.search.max_evals << '\n';
  out << "acqopt.tol = " << format_double(c.search.tol) << '\n';
  out << "hyper.enabled = " << (c.tune_enabled ? "true" : "false") << '\n';
  out << "hyper.gate_n = " << c.tune.gate << '\n';
  out << "hyper.scale_bounds = " << format_double(c.tune.scale_lo) << ' '
      << format_double(c.tune.scale_hi) << '\n';
  out << "hyper.budget = " << c.tune.budget << '\n';
  out << "evaluator.max_simultaneous = " << c.evaluator.max_simultaneous << '\n';
  out << "evaluator.blocking_fraction = " << format_double(c.evaluator.blocking_fraction) << '\n';
  out << "evaluator.max_attempts = " << c.evaluator.max_attempts << '\n';
  out << "evaluator.poll_interval_ms = " << format_double(c.evaluator.poll_interval * 1000.0)
      << '\n';
  return out.str();
}

std::string config_digest(const RunConfig& config) {
  const std::string echo = config_echo(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : echo) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace asybo
