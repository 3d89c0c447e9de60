#include "run_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "wsrctrl/error.hpp"

namespace wsrctrl::app {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) fail(join(path, it.key()), "unknown field");
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& require(const json& j, const std::string& path, const char* key) {
  const json* v = find(j, key);
  if (!v) fail(join(path, key), "missing required field");
  return *v;
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::int64_t as_int(const json& j, const std::string& path, std::int64_t lo, std::int64_t hi) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < lo || v > hi) {
    fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                   std::to_string(v));
  }
  return v;
}

std::uint64_t as_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(path, "expected a non-negative integer");
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

double positive(double v, const std::string& path) {
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

Vec as_vector(const json& j, const std::string& path, Index len) {
  if (!j.is_array()) fail(path, "expected an array of " + std::to_string(len) + " numbers");
  if (static_cast<Index>(j.size()) != len) {
    fail(path, "expected " + std::to_string(len) + " entries, got " + std::to_string(j.size()));
  }
  Vec v(len);
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = as_double(j[i], index(path, i));
  return v;
}

std::vector<double> as_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], index(path, i)));
  return out;
}

// Rows x cols from an array of rows. For square targets a bare number c is
// read as c * I.
Mat as_matrix(const json& j, const std::string& path, Index rows, Index cols) {
  if (j.is_number() && rows == cols) {
    return Mat::Identity(rows, cols) * as_double(j, path);
  }
  const std::string shape = std::to_string(rows) + "x" + std::to_string(cols);
  if (!j.is_array()) fail(path, "expected a " + shape + " matrix (array of rows)");
  if (static_cast<Index>(j.size()) != rows) {
    fail(path, "expected " + std::to_string(rows) + " rows for a " + shape + " matrix, got " +
                   std::to_string(j.size()));
  }
  Mat out(rows, cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    const std::string rp = index(path, r);
    if (!row.is_array()) fail(rp, "expected a row of " + std::to_string(cols) + " numbers");
    if (static_cast<Index>(row.size()) != cols) {
      fail(rp, "expected " + std::to_string(cols) + " columns, got " + std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      out(static_cast<Index>(r), static_cast<Index>(c)) = as_double(row[c], index(rp, c));
    }
  }
  return out;
}

SymMat as_symmetric(const json& j, const std::string& path, Index n) {
  const Mat m = as_matrix(j, path, n, n);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    fail(path, "matrix must be symmetric");
  }
  return SymMat(m);
}

template <typename F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (std::string_view(e.what()).starts_with("config:")) throw;
    fail(path, e.what());
  }
}

void parse_system(const json& j, RunConfig& cfg) {
  const std::string path = "system";
  require_object(j, path);
  allow_keys(j, path, {"n", "m", "mean_A", "mean_B", "a_family", "b_family", "stddev_ratio",
                       "stddev_A", "stddev_B"});
  DistributionSpec& s = cfg.system_spec;
  s.n = as_int(require(j, path, "n"), join(path, "n"), 1, 64);
  s.m = as_int(require(j, path, "m"), join(path, "m"), 1, 64);
  s.mean_A = as_matrix(require(j, path, "mean_A"), join(path, "mean_A"), s.n, s.n);
  s.mean_B = as_matrix(require(j, path, "mean_B"), join(path, "mean_B"), s.n, s.m);
  if (const json* f = find(j, "a_family")) {
    s.a_family = wrap(join(path, "a_family"), [&] { return parse_family(as_string(*f, join(path, "a_family"))); });
  }
  if (const json* f = find(j, "b_family")) {
    s.b_family = wrap(join(path, "b_family"), [&] { return parse_family(as_string(*f, join(path, "b_family"))); });
  }
  const json* ratio = find(j, "stddev_ratio");
  const json* sa = find(j, "stddev_A");
  const json* sb = find(j, "stddev_B");
  if (ratio && (sa || sb)) fail(path, "give either stddev_ratio or stddev_A/stddev_B, not both");
  if (ratio) {
    s.stddev_ratio = as_double(*ratio, join(path, "stddev_ratio"));
    if (s.stddev_ratio < 0.0) fail(join(path, "stddev_ratio"), "must be non-negative");
    if (s.stddev_ratio == 0.0) s.stddev = Vec::Zero(s.n * (s.n + s.m));
  } else {
    if (!sa || !sb) fail(path, "missing stddev_ratio or stddev_A/stddev_B");
    const Mat da = as_matrix(*sa, join(path, "stddev_A"), s.n, s.n);
    const Mat db = as_matrix(*sb, join(path, "stddev_B"), s.n, s.m);
    for (Index c = 0; c < da.cols(); ++c)
      for (Index r = 0; r < da.rows(); ++r)
        if (da(r, c) < 0.0) fail(index(index(join(path, "stddev_A"), r), c), "standard deviation must be non-negative");
    for (Index c = 0; c < db.cols(); ++c)
      for (Index r = 0; r < db.rows(); ++r)
        if (db(r, c) < 0.0) fail(index(index(join(path, "stddev_B"), r), c), "standard deviation must be non-negative");
    s.stddev.resize(s.n * (s.n + s.m));
    s.stddev << vec(da), vec(db);
  }
  cfg.system = wrap(path, [&] { return build_distribution(s); });
}

void parse_cost(const json& j, RunConfig& cfg) {
  const std::string path = "cost";
  require_object(j, path);
  allow_keys(j, path, {"Q", "R"});
  cfg.Q = as_symmetric(require(j, path, "Q"), join(path, "Q"), cfg.system.n);
  cfg.R = as_symmetric(require(j, path, "R"), join(path, "R"), cfg.system.m);
  if (!(cfg.Q.min_eigenvalue() > 0.0)) fail(join(path, "Q"), "must be positive definite");
  if (!(cfg.R.min_eigenvalue() > 0.0)) fail(join(path, "R"), "must be positive definite");
}

void parse_weight(const json* j, RunConfig& cfg) {
  const std::string path = "weight";
  cfg.weight.sigma = SymMat::Identity(cfg.system.n);
  if (!j) return;
  require_object(*j, path);
  allow_keys(*j, path, {"family", "theta", "alpha", "beta", "sigma"});
  if (const json* f = find(*j, "family")) {
    cfg.weight.family = wrap(join(path, "family"), [&] {
      return parse_weight_family(as_string(*f, join(path, "family")));
    });
  }
  if (const json* v = find(*j, "theta")) cfg.weight.theta = as_double(*v, join(path, "theta"));
  if (const json* v = find(*j, "alpha")) cfg.weight.alpha = as_double(*v, join(path, "alpha"));
  if (const json* v = find(*j, "beta")) cfg.weight.beta = as_double(*v, join(path, "beta"));
  if (const json* v = find(*j, "sigma")) {
    cfg.weight.sigma = as_symmetric(*v, join(path, "sigma"), cfg.system.n);
    if (cfg.weight.sigma.min_eigenvalue() < -1e-12 * std::max(1.0, cfg.weight.sigma.max_eigenvalue())) {
      fail(join(path, "sigma"), "must be positive semidefinite");
    }
  }
}

void parse_solver(const json* j, RunConfig& cfg) {
  const std::string path = "solver";
  if (!j) return;
  require_object(*j, path);
  allow_keys(*j, path, {"method", "fixed_point_tol", "newton_tol", "max_fixed_point_iters",
                        "max_newton_iters", "max_halvings", "continuation_steps", "jacobian",
                        "bank_size", "seed", "trace"});
  SolverOptions& o = cfg.solver;
  auto key = [&](const char* k) { return join(path, k); };
  if (const json* v = find(*j, "method")) {
    o.method = wrap(key("method"), [&] { return parse_method(as_string(*v, key("method"))); });
  }
  if (const json* v = find(*j, "fixed_point_tol")) o.fixed_point_tol = positive(as_double(*v, key("fixed_point_tol")), key("fixed_point_tol"));
  if (const json* v = find(*j, "newton_tol")) o.newton_tol = positive(as_double(*v, key("newton_tol")), key("newton_tol"));
  if (const json* v = find(*j, "max_fixed_point_iters")) o.max_fixed_point_iters = static_cast<int>(as_int(*v, key("max_fixed_point_iters"), 1, 100000000));
  if (const json* v = find(*j, "max_newton_iters")) o.max_newton_iters = static_cast<int>(as_int(*v, key("max_newton_iters"), 1, 100000));
  if (const json* v = find(*j, "max_halvings")) o.max_halvings = static_cast<int>(as_int(*v, key("max_halvings"), 0, 60));
  if (const json* v = find(*j, "continuation_steps")) o.continuation_steps = static_cast<int>(as_int(*v, key("continuation_steps"), 1, 10000));
  if (const json* v = find(*j, "jacobian")) {
    const std::string s = as_string(*v, key("jacobian"));
    if (s == "finite-difference") {
      o.jacobian = JacobianMode::FiniteDifference;
    } else if (s == "analytic") {
      o.jacobian = JacobianMode::AnalyticThetaZero;
    } else {
      fail(key("jacobian"), "expected finite-difference or analytic, got '" + s + "'");
    }
  }
  if (const json* v = find(*j, "bank_size")) cfg.bank_size = as_int(*v, key("bank_size"), 1, 100000000);
  if (const json* v = find(*j, "seed")) cfg.seed = as_seed(*v, key("seed"));
  if (const json* v = find(*j, "trace")) cfg.trace = as_bool(*v, key("trace"));
}

std::vector<double> parse_grid(const json& j, const std::string& path) {
  if (j.is_array()) {
    std::vector<double> grid = as_list(j, path);
    if (grid.empty()) fail(path, "theta grid must not be empty");
    return grid;
  }
  if (!j.is_object()) fail(path, "expected an array of thetas or {start, stop, step}");
  allow_keys(j, path, {"start", "stop", "step"});
  const double start = as_double(require(j, path, "start"), join(path, "start"));
  const double stop = as_double(require(j, path, "stop"), join(path, "stop"));
  const double step = positive(as_double(require(j, path, "step"), join(path, "step")), join(path, "step"));
  if (stop < start) fail(join(path, "stop"), "must not be below start");
  const double count = std::round((stop - start) / step);
  if (count > 100000) fail(join(path, "step"), "grid too fine");
  const auto k_max = static_cast<int>(count);
  std::vector<double> grid;
  // Interpolate rather than accumulate so 0.1 * k lands on the nearest double.
  for (int k = 0; k <= k_max; ++k) {
    grid.push_back(k_max == 0 ? start : start + (stop - start) * k / k_max);
  }
  return grid;
}

void parse_task(const json* j, RunConfig& cfg) {
  const std::string path = "task";
  TaskConfig& t = cfg.task;
  t.seed = cfg.seed;
  t.x0 = Vec::Ones(cfg.system.n);
  if (!j) return;
  require_object(*j, path);
  allow_keys(*j, path, {"x0", "horizon", "trials", "rho", "theta_grid", "repetitions",
                        "trajectories", "seed", "gain", "solution"});
  auto key = [&](const char* k) { return join(path, k); };
  if (const json* v = find(*j, "x0")) t.x0 = as_vector(*v, key("x0"), cfg.system.n);
  if (const json* v = find(*j, "horizon")) t.horizon = static_cast<int>(as_int(*v, key("horizon"), 0, 100000000));
  if (const json* v = find(*j, "trials")) t.trials = static_cast<int>(as_int(*v, key("trials"), 1, 100000000));
  if (const json* v = find(*j, "rho")) {
    t.rho = as_list(*v, key("rho"));
    if (t.rho.empty()) fail(key("rho"), "must not be empty");
    for (std::size_t i = 0; i < t.rho.size(); ++i) {
      if (!(t.rho[i] > 0.0 && t.rho[i] <= 100.0)) fail(index(key("rho"), i), "must lie in (0, 100]");
    }
  }
  if (const json* v = find(*j, "theta_grid")) t.theta_grid = parse_grid(*v, key("theta_grid"));
  if (const json* v = find(*j, "repetitions")) t.repetitions = static_cast<int>(as_int(*v, key("repetitions"), 2, 1000000));
  if (const json* v = find(*j, "trajectories")) t.trajectories = static_cast<int>(as_int(*v, key("trajectories"), 0, 100000000));
  if (const json* v = find(*j, "seed")) t.seed = as_seed(*v, key("seed"));
  const json* gain = find(*j, "gain");
  const json* sol = find(*j, "solution");
  if (gain && sol) fail(path, "give either gain or solution, not both");
  if (gain) t.gain = as_matrix(*gain, key("gain"), cfg.system.m, cfg.system.n);
  if (sol) {
    t.solution = std::filesystem::path(as_string(*sol, key("solution")));
  }
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_run_config(const json& input, const Overrides& overrides) {
  json doc = input;
  require_object(doc, "");
  allow_keys(doc, "", {"system", "cost", "weight", "solver", "task", "output"});
  if (overrides.seed) doc["solver"]["seed"] = *overrides.seed;

  RunConfig cfg;
  parse_system(require(doc, "", "system"), cfg);
  parse_cost(require(doc, "", "cost"), cfg);
  parse_weight(find(doc, "weight"), cfg);
  parse_solver(find(doc, "solver"), cfg);
  parse_task(find(doc, "task"), cfg);
  if (overrides.seed && doc.contains("task")) {
    // --seed drives every random stream of the run.
    doc["task"].erase("seed");
    cfg.task.seed = cfg.seed;
  }
  if (overrides.output) {
    cfg.output = *overrides.output;
  } else if (const json* out = find(doc, "output")) {
    cfg.output = as_string(*out, "output");
  }

  json science = doc;
  science.erase("output");
  cfg.canonical = science.dump();
  cfg.fingerprint = fnv1a_hex(cfg.canonical);
  return cfg;
}

RunConfig parse_run_config_text(const std::string& text, const Overrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at line.., column..: " prefix.
    const auto colon = what.find(": ");
    if (colon != std::string::npos) what = what.substr(colon + 2);
    throw ConfigError("config:" + line_col(text, e.byte) + ": " + what);
  }
  return parse_run_config(doc, overrides);
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file '" + path.string() + "'");
  try {
    return parse_run_config_text(ss.str(), overrides);
  } catch (const ConfigError& e) {
    std::string what = e.what();
    // "config:..." -> "<file>:..."
    if (what.rfind("config", 0) == 0) what = path.string() + what.substr(6);
    throw ConfigError(what);
  }
}

}  // namespace wsrctrl::app
