#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "wsrctrl/csv.hpp"
#include "wsrctrl/error.hpp"
#include "wsrctrl/simulate.hpp"
#include "wsrctrl/stability.hpp"
#include "wsrctrl/weights.hpp"
#include "wsrctrl/wsr.hpp"

namespace wsrctrl::app {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string gain_header(Index m, Index n) {
  std::string h;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) h += ",L" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
  return h;
}

// Column-major, matching gain_header.
std::string gain_fields(const Mat& L) {
  std::string s;
  for (Index j = 0; j < L.cols(); ++j)
    for (Index i = 0; i < L.rows(); ++i) s += "," + format_double(L(i, j));
  return s;
}

std::string nan_fields(Index count) {
  std::string s;
  for (Index k = 0; k < count; ++k) s += ",nan";
  return s;
}

std::string verdict(std::optional<bool> v) {
  if (!v) return "";
  return *v ? "stable" : "unstable";
}

std::shared_ptr<const SampleBank> make_bank(const RunConfig& cfg, const Log& log) {
  log.info("drawing bank: N=", cfg.bank_size, " seed=", cfg.seed);
  return std::make_shared<const SampleBank>(draw_bank(cfg.system, cfg.bank_size, cfg.seed));
}

DesignProblem make_problem(const RunConfig& cfg, std::shared_ptr<const SampleBank> bank) {
  return DesignProblem(std::move(bank), cfg.Q, cfg.R, cfg.weight);
}

std::string solution_csv(const RunConfig& cfg, const WsrSolution& sol, const SampleBank& bank) {
  std::ostringstream os;
  os << "quantity,row,col,value\n";
  for (Index j = 0; j < sol.P.dim(); ++j)
    for (Index i = 0; i < sol.P.dim(); ++i)
      os << "P," << i + 1 << ',' << j + 1 << ',' << format_double(sol.P(i, j)) << '\n';
  for (Index j = 0; j < sol.L.cols(); ++j)
    for (Index i = 0; i < sol.L.rows(); ++i)
      os << "L," << i + 1 << ',' << j + 1 << ',' << format_double(sol.L(i, j)) << '\n';
  os << "residual,,," << format_double(sol.residual) << '\n';
  os << "iterations,,," << sol.iterations << '\n';
  os << "method,,," << to_string(sol.method) << '\n';
  os << "weight_family,,," << to_string(cfg.weight.family) << '\n';
  os << "theta,,," << format_double(sol.theta) << '\n';
  os << "bank_size,,," << bank.size() << '\n';
  os << "bank_seed,,," << bank.seed() << '\n';
  os << "bank_provenance,,," << bank.provenance() << '\n';
  os << "config_fingerprint,,," << cfg.fingerprint << '\n';
  return os.str();
}

std::string trace_header(Index n, Index m) {
  std::string h = "iteration,delta,residual";
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) h += ",P" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
  return h + gain_header(m, n) + "\n";
}

Mat resolve_gain(const RunConfig& cfg, std::optional<SymMat>* P_out, std::optional<double>* theta_out) {
  if (cfg.task.gain) return *cfg.task.gain;
  if (cfg.task.solution) {
    SolutionFile f = read_solution_csv(*cfg.task.solution, cfg.system.n, cfg.system.m);
    if (P_out) *P_out = f.P;
    if (theta_out) *theta_out = f.theta;
    return f.L;
  }
  throw ConfigError("config: task: missing gain input (give task.gain or task.solution)");
}

}  // namespace

Artifacts cmd_design(const RunConfig& cfg, const Log& log) {
  auto bank = make_bank(cfg, log);
  const DesignProblem problem = make_problem(cfg, bank);
  const Index n = problem.n();
  const Index m = problem.m();

  std::ostringstream trace;
  TraceSink sink;
  if (cfg.trace) {
    trace << trace_header(n, m);
    sink = [&](const TraceRow& row) {
      trace << row.iteration << ',' << format_double(row.delta) << ','
            << format_double(row.residual);
      const Vec p = vech(row.P);
      for (Index k = 0; k < p.size(); ++k) trace << ',' << format_double(p(k));
      trace << gain_fields(row.L) << '\n';
    };
  }
  log.info("solving: method=", to_string(cfg.solver.method), " family=",
           to_string(cfg.weight.family), " theta=", format_double(cfg.weight.theta));
  const WsrSolution sol = solve(problem, cfg.solver, sink);
  log.info("converged: iterations=", sol.iterations, " residual=", format_double(sol.residual));

  const WeightedBank wb = build_weighted_bank(bank, cfg.weight, sol.L, sol.P, cfg.Q, cfg.R);
  std::ostringstream weights;
  write_weights_csv(wb, weights);

  Artifacts out{{"solution.csv", solution_csv(cfg, sol, *bank)},
                {"weights.csv", weights.str()}};
  if (cfg.trace) {
    if (cfg.solver.method == Method::FixedPoint) {
      out.push_back({"trace.csv", trace.str()});
    } else {
      log.info("trace: only the fixed-point iteration is traced; no trace.csv written");
    }
  }
  return out;
}

Artifacts cmd_sweep(const RunConfig& cfg, const Log& log) {
  if (cfg.task.theta_grid.empty()) throw ConfigError("config: task.theta_grid: missing or empty");
  auto bank = make_bank(cfg, log);
  const DesignProblem base = make_problem(cfg, bank);
  const Index n = base.n();
  const Index m = base.m();

  std::ostringstream os;
  os << "theta,status,iterations,residual,rho_p,rho_w,ms,wms" << gain_header(m, n) << ",message\n";
  for (double theta : cfg.task.theta_grid) {
    os << format_double(theta);
    try {
      const DesignProblem problem = base.with_theta(theta);
      const WsrSolution sol = solve(problem, cfg.solver);
      const WeightedBank wb = build_weighted_bank(bank, problem.weight(), sol.L, sol.P, cfg.Q, cfg.R);
      const StabilityReport r = wms_check(wb, sol.L);
      log.info("theta=", format_double(theta), " iterations=", sol.iterations,
               " rho_p=", format_double(r.rho_plain), " rho_w=", format_double(*r.rho_weighted));
      os << ",ok," << sol.iterations << ',' << format_double(sol.residual) << ','
         << format_double(r.rho_plain) << ',' << format_double(*r.rho_weighted) << ','
         << verdict(r.ms_stable()) << ',' << verdict(r.wms_stable()) << gain_fields(sol.L) << ",\n";
    } catch (const NumericalError& e) {
      log.info("theta=", format_double(theta), " failed: ", e.what());
      os << ",failed,,nan,nan,nan,," << nan_fields(m * n) << ',' << csv_field(e.what()) << '\n';
    }
  }
  return {{"sweep.csv", os.str()}};
}

Artifacts cmd_stability(const RunConfig& cfg, const Log& log) {
  auto bank = make_bank(cfg, log);
  std::optional<SymMat> P;
  std::optional<double> theta;
  Mat L;
  if (cfg.task.gain || cfg.task.solution) {
    L = resolve_gain(cfg, &P, &theta);
  } else {
    const WsrSolution sol = solve(make_problem(cfg, bank), cfg.solver);
    L = sol.L;
    P = sol.P;
    theta = sol.theta;
  }
  if (L.rows() != cfg.system.m || L.cols() != cfg.system.n) {
    throw DimensionError("stability: gain has the wrong shape");
  }
  const WeightSpec spec = cfg.weight.with_theta(theta.value_or(cfg.weight.theta));
  StabilityReport r;
  if (P || spec.effective_theta() == 0.0) {
    // With theta = 0 the weights are one whatever P is.
    const SymMat p = P.value_or(SymMat::Zero(cfg.system.n));
    r = wms_check(build_weighted_bank(bank, spec, L, p, cfg.Q, cfg.R), L);
  } else {
    log.info("no P available for theta != 0; skipping the weighted check");
    r = ms_check(*bank, L);
  }
  log.info("rho_p=", format_double(r.rho_plain));
  std::ostringstream os;
  os << "theta,rho_p,rho_w,ms,wms" << gain_header(L.rows(), L.cols()) << '\n'
     << format_double(spec.theta) << ',' << format_double(r.rho_plain) << ','
     << format_double(r.rho_weighted.value_or(kNaN)) << ',' << verdict(r.ms_stable()) << ','
     << verdict(r.wms_stable()) << gain_fields(L) << '\n';
  return {{"stability.csv", os.str()}};
}

Artifacts cmd_simulate(const RunConfig& cfg, const Log& log) {
  const Mat L = resolve_gain(cfg, nullptr, nullptr);
  if (L.rows() != cfg.system.m || L.cols() != cfg.system.n) {
    throw DimensionError("simulate: gain has the wrong shape");
  }
  StudyOptions opts;
  opts.trials = cfg.task.trials;
  opts.horizon = cfg.task.horizon;
  opts.rho = cfg.task.rho;
  opts.seed = cfg.task.seed;
  opts.trajectory_cap = cfg.task.trajectories;
  log.info("simulating: trials=", opts.trials, " horizon=", opts.horizon, " seed=", opts.seed);
  const SimulationSummary s = mc_cost_study(cfg.system, L, cfg.task.x0, {cfg.Q, cfg.R}, opts);
  log.info("mean cost=", format_double(s.mean_cost), " diverged=", s.diverged);

  std::ostringstream costs, worst, summary;
  write_costs_csv(s, costs);
  write_worst_csv(s, worst);
  summary << "trials,horizon,mean_cost,diverged\n"
          << s.trials << ',' << s.horizon << ',' << format_double(s.mean_cost) << ','
          << s.diverged << '\n';
  Artifacts out{{"costs.csv", costs.str()}, {"worst.csv", worst.str()},
                {"summary.csv", summary.str()}};
  if (opts.trajectory_cap > 0) {
    std::ostringstream traj;
    write_trajectories_csv(s, traj);
    out.push_back({"trajectories.csv", traj.str()});
  }
  return out;
}

Artifacts cmd_robustness(const RunConfig& cfg, const Log& log) {
  RobustnessOptions opts;
  opts.theta = cfg.weight.theta;
  opts.repetitions = cfg.task.repetitions;
  opts.bank_size = cfg.bank_size;
  opts.base_seed = cfg.seed;
  log.info("robustness: repetitions=", opts.repetitions, " N=", opts.bank_size);
  const RobustnessSummary s =
      robustness_study(cfg.system, {cfg.Q, cfg.R}, cfg.weight, cfg.solver, opts);
  log.info("failures=", s.failures);

  std::ostringstream table, gains;
  write_robustness_csv(s, table);
  const Index m = cfg.system.m;
  const Index n = cfg.system.n;
  gains << "repetition,seed,status" << gain_header(m, n) << ",message\n";
  std::size_t ok = 0;
  std::size_t bad = 0;
  for (int k = 0; k < s.repetitions; ++k) {
    gains << k << ',' << s.seeds[static_cast<std::size_t>(k)];
    if (ok < s.succeeded.size() && s.succeeded[ok] == k) {
      gains << ",ok" << gain_fields(s.gains[ok]) << ",\n";
      ++ok;
    } else {
      gains << ",failed" << nan_fields(m * n) << ',' << csv_field(s.messages[bad]) << '\n';
      ++bad;
    }
  }
  return {{"robustness.csv", table.str()}, {"robustness_gains.csv", gains.str()}};
}

SolutionFile read_solution_csv(const std::filesystem::path& path, Index n, Index m) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open solution file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "quantity,row,col,value") {
    throw IoError(path.string() + ": not a solution file (bad header)");
  }
  SolutionFile f;
  Mat P = Mat::Constant(n, n, kNaN);
  f.L = Mat::Constant(m, n, kNaN);
  bool have_p = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 4 columns");
    }
    const std::string& q = cells[0];
    try {
      if (q == "P" || q == "L") {
        const Index r = std::stol(cells[1]) - 1;
        const Index c = std::stol(cells[2]) - 1;
        Mat& target = q == "P" ? P : f.L;
        if (r < 0 || c < 0 || r >= target.rows() || c >= target.cols()) {
          throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + q +
                        " index out of range for the configured system");
        }
        target(r, c) = std::stod(cells[3]);
        have_p = have_p || q == "P";
      } else if (q == "theta") {
        f.theta = std::stod(cells[3]);
      } else if (q == "config_fingerprint") {
        f.config_fingerprint = cells[3];
      }
    } catch (const std::logic_error&) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!f.L.allFinite()) throw IoError(path.string() + ": incomplete or non-finite gain L");
  if (have_p) {
    if (!P.allFinite()) throw IoError(path.string() + ": incomplete or non-finite P");
    f.P = SymMat(P);
  }
  return f;
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const Artifact& a : artifacts) {
    const std::filesystem::path p = dir / a.name;
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
    os << a.content;
    os.flush();
    if (!os) throw IoError("failed writing '" + p.string() + "'");
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controller design for linear systems with random parameters (weighted stochastic Riccati equations)",
               "wsrctrl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "wsrctrl 0.1.0");

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::map<std::string, int> verbosity;
  const std::map<std::string, std::string> subcommands{
      {"design", "Solve the WSR equations and write solution.csv (and trace.csv)"},
      {"sweep", "Design over task.theta_grid and check MS/WMS stability per theta"},
      {"stability", "MS/WMS stability of a given or freshly designed gain"},
      {"simulate", "Monte-Carlo closed-loop cost study of a given gain"},
      {"robustness", "Spread of designed gains over independently drawn banks"}};
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, CLI::Option*> seed_opts;
  std::map<std::string, CLI::Option*> out_opts;
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "Run configuration (JSON)")->required();
    out_opts[name] = sub->add_option("-o,--out", out_dir, "Output directory (overrides config)");
    seed_opts[name] = sub->add_option("-s,--seed", seed, "Seed for every random stream (overrides config)");
    sub->add_flag("-v,--verbose", verbosity[name], "Print progress to stderr");
    subs[name] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  std::string name;
  for (const auto& [n, sub] : subs)
    if (sub->parsed()) name = n;

  try {
    Overrides ov;
    if (*out_opts[name]) ov.output = out_dir;
    if (*seed_opts[name]) ov.seed = seed;
    const RunConfig cfg = load_run_config(config_path, ov);
    const Log log(&err, verbosity[name]);
    log.info("config fingerprint ", cfg.fingerprint);
    Artifacts artifacts;
    if (name == "design") {
      artifacts = cmd_design(cfg, log);
    } else if (name == "sweep") {
      artifacts = cmd_sweep(cfg, log);
    } else if (name == "stability") {
      artifacts = cmd_stability(cfg, log);
    } else if (name == "simulate") {
      artifacts = cmd_simulate(cfg, log);
    } else {
      artifacts = cmd_robustness(cfg, log);
    }
    write_artifacts(cfg.output, artifacts);
    for (const Artifact& a : artifacts) out << (cfg.output / a.name).string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace wsrctrl::app
