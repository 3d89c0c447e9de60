#pragma once

// Closed-loop Monte-Carlo evaluation. Unlike the solver, which reuses one
// fixed bank, every simulated step draws a fresh (A_t, B_t).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wsrctrl/ensemble.hpp"
#include "wsrctrl/matops.hpp"
#include "wsrctrl/weights.hpp"
#include "wsrctrl/wsr.hpp"

namespace wsrctrl {

// A trial whose state norm exceeds this is stopped and scored +inf.
inline constexpr double kDivergenceNorm = 1e12;

struct RolloutResult {
  // x_0 .. x_T as columns; empty unless requested.
  Mat trajectory;
  // sum_{t=0}^{T} x_t^T Q x_t + u_t^T R u_t with u_t = -L x_t.
  double cost = 0.0;
  // First step whose state blew past kDivergenceNorm (or went non-finite).
  std::optional<int> diverged_at;
};

struct CostWeights {
  SymMat Q;
  SymMat R;
};

RolloutResult rollout(const ParameterDistribution& dist, const Mat& L, const Vec& x0, int horizon,
                      const CostWeights& cost, std::uint64_t seed, bool keep_trajectory = false);

// Mean of the ceil(rho * N / 100) largest costs; rho in (0, 100].
double worst_average(std::span<const double> costs, double rho);

struct SimulationSummary {
  int trials = 0;
  int horizon = 0;
  std::vector<double> costs;
  double mean_cost = 0.0;
  int diverged = 0;
  std::vector<double> rho;
  std::vector<double> worst_averages;  // aligned with rho
  std::vector<Mat> trajectories;       // first `trajectory_cap` trials
};

struct StudyOptions {
  int trials = 1;
  int horizon = 300;
  std::vector<double> rho{100.0};
  std::uint64_t seed = 0;
  int trajectory_cap = 0;
};

// Trial k uses sub_seed(options.seed, k).
SimulationSummary mc_cost_study(const ParameterDistribution& dist, const Mat& L, const Vec& x0,
                                const CostWeights& cost, const StudyOptions& options);

struct RobustnessSummary {
  int repetitions = 0;
  int failures = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<Mat> gains;              // successful designs only
  std::vector<int> succeeded;          // repetition index of each gain
  std::vector<std::string> messages;   // one per failed repetition
  std::vector<int> failed;             // repetition index of each message
  Mat mean;
  Mat stddev;                          // sample standard deviation (N - 1)
};

struct RobustnessOptions {
  double theta = 0.0;
  int repetitions = 2;
  Index bank_size = 10000;
  std::uint64_t base_seed = 0;
};

// Repetition k draws its bank with sub_seed(base_seed, k) and solves.
RobustnessSummary robustness_study(const ParameterDistribution& dist, const CostWeights& cost,
                                   const WeightSpec& weight, const SolverOptions& solver,
                                   const RobustnessOptions& options);

// Same, with the bank seed of each repetition given explicitly.
RobustnessSummary robustness_study(const ParameterDistribution& dist, const CostWeights& cost,
                                   const WeightSpec& weight, const SolverOptions& solver,
                                   double theta, Index bank_size,
                                   std::span<const std::uint64_t> seeds);

// Columns: trial,cost.
void write_costs_csv(const SimulationSummary& summary, std::ostream& os);
// Columns: rho,worst_average.
void write_worst_csv(const SimulationSummary& summary, std::ostream& os);
// Columns: trial,t,x1..xn.
void write_trajectories_csv(const SimulationSummary& summary, std::ostream& os);
// Columns: entry,row,col,mean,stddev.
void write_robustness_csv(const RobustnessSummary& summary, std::ostream& os);

}  // namespace wsrctrl
