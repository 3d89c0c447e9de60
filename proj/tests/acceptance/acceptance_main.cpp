// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "support/oracles.hpp"
#include "wsrctrl/wsrctrl.hpp"

namespace {

using namespace wsrctrl;
namespace fs = std::filesystem;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

const Mat kMeanA = (Mat(2, 2) << 0.97, -0.03, 0.1, 1.03).finished();
const Mat kMeanB = (Mat(2, 1) << 0.005, 0.01).finished();
const SymMat kQ(Mat::Identity(2, 2) * 3.0);
const SymMat kR(scalar(1.0));
constexpr std::uint64_t kSeed = 42;

WeightSpec rrsl(double theta) {
  WeightSpec w;
  w.family = WeightFamily::RRSL;
  w.theta = theta;
  w.alpha = 10.0;
  w.beta = 11.0;
  w.sigma = SymMat::Identity(2);
  return w;
}

// Shared N = 10000 bank on the benchmark plant.
std::shared_ptr<const SampleBank> plant_bank() {
  static auto bank =
      std::make_shared<const SampleBank>(draw_bank(example_plant_distribution(), 10000, kSeed));
  return bank;
}

const WsrSolution& theta_zero_solution() {
  static const WsrSolution sol =
      solve(DesignProblem(plant_bank(), kQ, kR, rrsl(0.0)), SolverOptions{});
  return sol;
}

std::shared_ptr<const SampleBank> point_mass_bank(const Mat& A, const Mat& B) {
  DistributionSpec spec;
  spec.n = A.rows();
  spec.m = B.cols();
  spec.mean_A = A;
  spec.mean_B = B;
  spec.stddev = Vec::Zero(A.size() + B.size());
  return std::make_shared<const SampleBank>(draw_bank(build_distribution(spec), 1, 0));
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const WsrSolution sol =
      solve(DesignProblem(point_mass_bank(kMeanA, kMeanB), kQ, kR, WeightSpec{}), SolverOptions{});
  const Mat ref = testing::dare_fixed_point(kMeanA, kMeanB, kQ.matrix(), kR.matrix());
  const double err_matrix = (sol.P.matrix() - ref).norm();

  const WsrSolution s1 = solve(DesignProblem(point_mass_bank(scalar(0.5), scalar(1.0)),
                                             SymMat(scalar(1.0)), SymMat(scalar(1.0)), WeightSpec{}),
                               SolverOptions{});
  const double closed = (0.25 + std::sqrt(4.0625)) / 2.0;
  const double err_scalar = std::abs(s1.P(0, 0) - closed);
  const double t = seconds_since(t0);
  return {err_matrix <= 1e-8 && err_scalar <= 1e-6 && t < 1.0,
          "||P - P_dare||_F=" + fmt(err_matrix) + " |pi - pi*|=" + fmt(err_scalar) +
              " time=" + fmt(t) + "s"};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  const DesignProblem problem(plant_bank(), kQ, kR, rrsl(0.0));
  const WsrSolution& sol = theta_zero_solution();
  const double h = implicit_h(pack(sol.P, sol.L), problem).norm();
  const double gap = (sol.P - kQ).min_eigenvalue();
  const double rho = ms_radius(*plant_bank(), sol.L);
  const double t = seconds_since(t0);
  return {h < 1e-8 && gap >= 0.0 && rho < 1.0 && t < 30.0,
          "iterations=" + std::to_string(sol.iterations) + " ||h||=" + fmt(h) +
              " min eig(P-Q)=" + fmt(gap) + " rho_p=" + fmt(rho) + " time=" + fmt(t) + "s"};
}

Outcome criterion3() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  const Vec z0 = pack(theta_zero_solution().P, theta_zero_solution().L);
  for (double theta : {0.2, 0.5, 1.0}) {
    const DesignProblem problem(plant_bank(), kQ, kR, rrsl(theta));
    const WsrSolution fp = solve(problem, SolverOptions{});
    SolverOptions nopts;
    nopts.method = Method::Newton;
    const WsrSolution nt = newton_solve(problem, z0, nopts);
    const double dp = (fp.P.matrix() - nt.P.matrix()).norm();
    const double dl = (fp.L - nt.L).norm();
    ok = ok && dp <= 1e-6 && dl <= 1e-6;
    detail += "theta=" + fmt(theta) + ": dP=" + fmt(dp) + " dL=" + fmt(dl) + " newton_iters=" +
              std::to_string(nt.iterations) + "; ";
  }
  const double t = seconds_since(t0);
  ok = ok && t < 120.0;
  return {ok, detail + "time=" + fmt(t) + "s"};
}

Outcome criterion4() {
  const DesignProblem problem(plant_bank(), kQ, kR, rrsl(1.0));
  const WsrSolution sol = solve(problem, SolverOptions{});
  int first = -1;
  for (std::size_t s = 0; s < sol.history.size(); ++s) {
    if (sol.history[s] < 1e-6) {
      first = static_cast<int>(s);
      break;
    }
  }
  const double at299 = sol.history.size() > 299 ? sol.history[299] : 0.0;
  const double rel299 = at299 / sol.P.matrix().norm();
  return {first >= 0 && first < 300,
          "first s with delta<1e-6: " + std::to_string(first) + "; delta at s=299: " + fmt(at299) +
              " (relative to ||P*||_F: " + fmt(rel299) + "); converged at s=" +
              std::to_string(sol.iterations)};
}

Outcome criterion5() {
  bool ok = true;
  double worst_p = 0.0;
  double worst_w = 0.0;
  std::string failures;
  for (int k = 0; k <= 10; ++k) {
    const double theta = k / 10.0;
    try {
      const DesignProblem problem(plant_bank(), kQ, kR, rrsl(theta));
      const WsrSolution sol = solve(problem, SolverOptions{});
      const WeightedBank wb = build_weighted_bank(plant_bank(), problem.weight(), sol.L, sol.P, kQ, kR);
      const StabilityReport r = wms_check(wb, sol.L);
      worst_p = std::max(worst_p, r.rho_plain);
      worst_w = std::max(worst_w, *r.rho_weighted);
      ok = ok && r.ms_stable() && *r.wms_stable();
    } catch (const NumericalError& e) {
      ok = false;
      failures += " theta=" + fmt(theta) + ": " + e.what();
    }
  }
  return {ok, "max rho_p=" + fmt(worst_p) + " max rho_w=" + fmt(worst_w) + failures};
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t k = 0; k < 20; ++k) seeds.push_back(sub_seed(2024, k));
  const CostWeights cost{kQ, kR};
  WeightSpec rsl;
  rsl.family = WeightFamily::RSL;
  rsl.sigma = SymMat::Identity(2);
  const auto dist = example_plant_distribution();
  const RobustnessSummary a = robustness_study(dist, cost, rrsl(1.0), SolverOptions{}, 1.0, 2000, seeds);
  const RobustnessSummary b = robustness_study(dist, cost, rsl, SolverOptions{}, 0.00125, 2000, seeds);
  const double t = seconds_since(t0);
  const bool ok = (a.stddev.array() < b.stddev.array()).all() && t < 300.0;
  std::ostringstream d;
  d << "stddev RRSL=[" << fmt(a.stddev(0, 0)) << ", " << fmt(a.stddev(0, 1)) << "] RSL=["
    << fmt(b.stddev(0, 0)) << ", " << fmt(b.stddev(0, 1)) << "] failed designs RRSL/RSL=" << a.failures
    << "/" << b.failures << " of 20 time=" << fmt(t) << "s";
  return {ok, d.str()};
}

Outcome criterion7() {
  const auto t0 = Clock::now();
  const WsrSolution rn = theta_zero_solution();
  const WsrSolution rs = solve(DesignProblem(plant_bank(), kQ, kR, rrsl(1.0)), SolverOptions{});
  StudyOptions opts;
  opts.trials = 10000;
  opts.horizon = 300;
  opts.rho = {10.0};
  opts.seed = 7;
  const Vec x0 = Vec::Ones(2);
  const auto dist = example_plant_distribution();
  const SimulationSummary s_rn = mc_cost_study(dist, rn.L, x0, {kQ, kR}, opts);
  const SimulationSummary s_rs = mc_cost_study(dist, rs.L, x0, {kQ, kR}, opts);
  const double t = seconds_since(t0);
  return {s_rs.worst_averages[0] < s_rn.worst_averages[0] && t < 300.0,
          "worst-10% RRSL=" + fmt(s_rs.worst_averages[0]) + " RN=" + fmt(s_rn.worst_averages[0]) +
              " (means " + fmt(s_rs.mean_cost) + " / " + fmt(s_rn.mean_cost) + ") time=" + fmt(t) + "s"};
}

Outcome criterion8() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };

  // Weight normalization and theta = 0 weights.
  const WsrSolution& base = theta_zero_solution();
  const WsrSolution sol1 = solve(DesignProblem(plant_bank(), kQ, kR, rrsl(1.0)), SolverOptions{});
  const WeightedBank wb1 = build_weighted_bank(plant_bank(), rrsl(1.0), sol1.L, sol1.P, kQ, kR);
  const double norm_err = std::abs(wb1.weights().mean() - 1.0);
  check(norm_err <= 1e-12, "normalization " + fmt(norm_err));
  for (WeightFamily f : {WeightFamily::RiskNeutral, WeightFamily::RSL, WeightFamily::RRSL}) {
    WeightSpec w = rrsl(0.0);
    w.family = f;
    const WeightedBank wb0 = build_weighted_bank(plant_bank(), w, sol1.L, sol1.P, kQ, kR);
    check((wb0.weights().array() == 1.0).all(), "theta=0 weights not exactly 1");
  }

  // P_s >= Q along the fixed-point iteration.
  double worst_gap = std::numeric_limits<double>::infinity();
  iterate_wsr(DesignProblem(plant_bank(), kQ, kR, rrsl(1.0)), SymMat::Zero(2), Mat::Zero(1, 2),
              SolverOptions{}, [&](const TraceRow& row) {
                if (row.iteration >= 1) worst_gap = std::min(worst_gap, (row.P - kQ).min_eigenvalue());
              });
  check(worst_gap >= -1e-9, "P_s - Q min eigenvalue " + fmt(worst_gap));

  // vech / duplication / elimination identities.
  std::mt19937_64 rng(99);
  double worst_id = 0.0;
  for (Index n = 1; n <= 6; ++n) {
    const Mat D = duplication_matrix(n);
    const Mat L = elimination_matrix(n);
    worst_id = std::max(worst_id, (L * D - Mat::Identity(D.cols(), D.cols())).cwiseAbs().maxCoeff());
    for (int k = 0; k < 10; ++k) {
      const Mat s = testing::random_symmetric(rng, n);
      worst_id = std::max(worst_id, (D * vech(s) - vec(s)).cwiseAbs().maxCoeff());
      worst_id = std::max(worst_id, (L * vec(s) - vech(s)).cwiseAbs().maxCoeff());
      worst_id = std::max(worst_id, (unvech(vech(s), n).matrix() - s).cwiseAbs().maxCoeff());
    }
  }
  check(worst_id <= 1e-14, "vech identities " + fmt(worst_id));

  // Analytic Jacobian vs finite differences at theta = 0.
  const DesignProblem p0(plant_bank(), kQ, kR, rrsl(0.0));
  const Vec z = pack(base.P, base.L);
  const Mat an = jacobian_h(z, p0, JacobianMode::AnalyticThetaZero);
  const Mat fd = jacobian_h(z, p0, JacobianMode::FiniteDifference);
  const double jac_err = (an - fd).cwiseAbs().maxCoeff();
  check(jac_err <= 1e-5, "jacobian " + fmt(jac_err));

  // Lemma 2: power-iteration decay vs spectral-radius verdict.
  int agree = 0;
  int stable = 0;
  for (int k = 0; k < 50; ++k) {
    const Index n = 1 + k % 3;
    const Index m = 1 + (k / 3) % 2;
    const Mat A = testing::random_matrix(rng, n, n) * 0.5;
    const Mat B = testing::random_matrix(rng, n, m) * 0.5;
    Mat params(n * (n + m), 200);
    std::normal_distribution<double> g;
    for (Index s = 0; s < params.cols(); ++s) {
      Vec col(n * (n + m));
      col << vec(A), vec(B);
      for (Index i = 0; i < col.size(); ++i) col(i) += 0.2 * g(rng);
      params.col(s) = col;
    }
    const Mat gain = testing::random_matrix(rng, m, n) * 0.3;
    // Rescale so the radius lands clearly on one side of 1.
    const double target = k % 2 == 0 ? 0.5 + 0.4 * (k / 50.0) : 1.1 + 0.5 * (k / 50.0);
    const double rho0 = ms_radius(SampleBank(n, m, params, 0, "lemma2"), gain);
    params *= std::sqrt(target / rho0);
    const SampleBank bank(n, m, params, 0, "lemma2");
    const bool by_radius = ms_radius(bank, gain) < 1.0;
    const bool by_decay = testing::lyapunov_power_decay(bank, gain, Vec(), 2000) < 0.0;
    agree += by_radius == by_decay;
    stable += by_radius;
  }
  check(agree == 50 && stable > 0 && stable < 50,
        "lemma2 agreement " + std::to_string(agree) + "/50 (stable " + std::to_string(stable) + ")");

  std::string detail = failed.empty() ? "all properties hold" : "";
  for (const auto& f : failed) detail += f + "; ";
  detail += " [norm_err=" + fmt(norm_err) + " identities=" + fmt(worst_id) + " jac=" + fmt(jac_err) +
            " lemma2=" + std::to_string(agree) + "/50]";
  return {failed.empty(), detail};
}

Outcome criterion9() {
  const fs::path dir = fs::temp_directory_path() / ("wsrctrl_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const char* config = R"({
    "system": {"n": 2, "m": 1, "mean_A": [[0.97, -0.03], [0.1, 1.03]], "mean_B": [[0.005], [0.01]],
               "a_family": "normal", "b_family": "laplace", "stddev_ratio": 0.1},
    "cost": {"Q": 3, "R": 1},
    "weight": {"family": "rrsl", "theta": 1.0, "alpha": 10, "beta": 11, "sigma": 1},
    "solver": {"method": "fixed-point", "bank_size": 10000, "seed": 42},
    "task": {"theta_grid": {"start": 0.0, "stop": 1.0, "step": 0.1}}
  })";
  std::ofstream(dir / "sweep.json") << config;
  std::ostringstream out, err;
  const int a = app::run_cli({"sweep", "-c", (dir / "sweep.json").string(), "-o", (dir / "a").string()}, out, err);
  const int b = app::run_cli({"sweep", "-c", (dir / "sweep.json").string(), "-o", (dir / "b").string()}, out, err);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string sa = slurp(dir / "a" / "sweep.csv");
  const std::string sb = slurp(dir / "b" / "sweep.csv");
  fs::remove_all(dir);
  return {a == 0 && b == 0 && !sa.empty() && sa == sb,
          "exit codes " + std::to_string(a) + "/" + std::to_string(b) + ", " +
              std::to_string(sa.size()) + " bytes, identical=" + (sa == sb ? "yes" : "no") +
              (err.str().empty() ? "" : " stderr: " + err.str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"deterministic reduction to the DARE", criterion1},
      {"theta=0 reduces to stochastic LQR", criterion2},
      {"Newton and fixed-point agree", criterion3},
      {"fixed-point delta < 1e-6 before s=300 (RRSL theta=1)", criterion4},
      {"MS and WMS stability over theta grid", criterion5},
      {"RRSL gains vary less than RSL across banks", criterion6},
      {"RRSL suppresses worst-10% cost vs RN", criterion7},
      {"property suite", criterion8},
      {"sweep runs are byte-identical", criterion9},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first
              << " -- " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
