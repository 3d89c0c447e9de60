#include "wsrctrl/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <string>

#include "wsrctrl/csv.hpp"
#include "wsrctrl/error.hpp"

namespace wsrctrl {

RolloutResult rollout(const ParameterDistribution& dist, const Mat& L, const Vec& x0, int horizon,
                      const CostWeights& cost, std::uint64_t seed, bool keep_trajectory) {
  const Index n = dist.n;
  const Index m = dist.m;
  if (horizon < 0) throw ConfigError("rollout: horizon must be >= 0");
  if (x0.size() != n || L.rows() != m || L.cols() != n || cost.Q.dim() != n || cost.R.dim() != m) {
    throw DimensionError("rollout: inconsistent dimensions");
  }
  RolloutResult out;
  if (keep_trajectory) out.trajectory = Mat::Zero(n, horizon + 1);

  Rng rng(seed);
  Vec lambda(dist.dim());
  Mat A(n, n);
  Mat B(n, m);
  Vec x = x0;
  Vec u(m);
  Vec next(n);
  double total = 0.0;
  for (int t = 0;; ++t) {
    if (!x.allFinite() || x.norm() > kDivergenceNorm) {
      out.diverged_at = t;
      out.cost = std::numeric_limits<double>::infinity();
      return out;
    }
    if (keep_trajectory) out.trajectory.col(t) = x;
    u.noalias() = -L * x;
    total += x.dot(cost.Q.matrix() * x) + u.dot(cost.R.matrix() * u);
    if (t == horizon) break;
    draw_parameter(dist, rng, lambda);
    A = Eigen::Map<const Mat>(lambda.data(), n, n);
    B = Eigen::Map<const Mat>(lambda.data() + n * n, n, m);
    next.noalias() = A * x;
    next.noalias() += B * u;
    x = next;
  }
  out.cost = total;
  return out;
}

double worst_average(std::span<const double> costs, double rho) {
  if (costs.empty()) throw ConfigError("worst_average: no costs");
  if (!(rho > 0.0 && rho <= 100.0)) throw ConfigError("worst_average: rho must lie in (0, 100]");
  const auto total = static_cast<double>(costs.size());
  auto count = static_cast<std::size_t>(std::ceil(rho * total / 100.0 - 1e-9));
  count = std::clamp<std::size_t>(count, 1, costs.size());
  std::vector<double> sorted(costs.begin(), costs.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(count),
                    sorted.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) sum += sorted[i];
  return sum / static_cast<double>(count);
}

SimulationSummary mc_cost_study(const ParameterDistribution& dist, const Mat& L, const Vec& x0,
                                const CostWeights& cost, const StudyOptions& options) {
  if (options.trials < 1) throw ConfigError("mc_cost_study: trials must be >= 1");
  for (double r : options.rho) {
    if (!(r > 0.0 && r <= 100.0)) throw ConfigError("mc_cost_study: rho must lie in (0, 100]");
  }
  SimulationSummary s;
  s.trials = options.trials;
  s.horizon = options.horizon;
  s.costs.reserve(static_cast<std::size_t>(options.trials));
  double sum = 0.0;
  for (int k = 0; k < options.trials; ++k) {
    const bool keep = k < options.trajectory_cap;
    RolloutResult r = rollout(dist, L, x0, options.horizon, cost,
                              sub_seed(options.seed, static_cast<std::uint64_t>(k)), keep);
    if (r.diverged_at) ++s.diverged;
    if (keep) s.trajectories.push_back(std::move(r.trajectory));
    s.costs.push_back(r.cost);
    sum += r.cost;
  }
  s.mean_cost = sum / static_cast<double>(options.trials);
  s.rho = options.rho;
  for (double r : options.rho) s.worst_averages.push_back(worst_average(s.costs, r));
  return s;
}

RobustnessSummary robustness_study(const ParameterDistribution& dist, const CostWeights& cost,
                                   const WeightSpec& weight, const SolverOptions& solver,
                                   double theta, Index bank_size,
                                   std::span<const std::uint64_t> seeds) {
  if (seeds.size() < 2) throw ConfigError("robustness_study: repetitions must be >= 2");
  RobustnessSummary out;
  out.repetitions = static_cast<int>(seeds.size());
  out.seeds.assign(seeds.begin(), seeds.end());
  const WeightSpec w = weight.with_theta(theta);
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    try {
      auto bank = std::make_shared<const SampleBank>(draw_bank(dist, bank_size, seeds[k]));
      const DesignProblem problem(bank, cost.Q, cost.R, w);
      out.gains.push_back(solve(problem, solver).L);
      out.succeeded.push_back(static_cast<int>(k));
    } catch (const NumericalError& e) {
      ++out.failures;
      out.messages.emplace_back(e.what());
      out.failed.push_back(static_cast<int>(k));
    }
  }
  const Index m = dist.m;
  const Index n = dist.n;
  out.mean = Mat::Constant(m, n, std::numeric_limits<double>::quiet_NaN());
  out.stddev = Mat::Constant(m, n, std::numeric_limits<double>::quiet_NaN());
  const auto k = static_cast<double>(out.gains.size());
  if (!out.gains.empty()) {
    out.mean.setZero();
    for (const Mat& g : out.gains) out.mean += g;
    out.mean /= k;
  }
  if (out.gains.size() >= 2) {
    out.stddev.setZero();
    for (const Mat& g : out.gains) out.stddev.array() += (g - out.mean).array().square();
    out.stddev = (out.stddev / (k - 1.0)).cwiseSqrt();
  }
  return out;
}

RobustnessSummary robustness_study(const ParameterDistribution& dist, const CostWeights& cost,
                                   const WeightSpec& weight, const SolverOptions& solver,
                                   const RobustnessOptions& options) {
  if (options.repetitions < 2) throw ConfigError("robustness_study: repetitions must be >= 2");
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < options.repetitions; ++k) {
    seeds.push_back(sub_seed(options.base_seed, static_cast<std::uint64_t>(k)));
  }
  return robustness_study(dist, cost, weight, solver, options.theta, options.bank_size, seeds);
}

void write_costs_csv(const SimulationSummary& summary, std::ostream& os) {
  os << "trial,cost\n";
  for (std::size_t k = 0; k < summary.costs.size(); ++k) {
    os << k << ',' << format_double(summary.costs[k]) << '\n';
  }
}

void write_worst_csv(const SimulationSummary& summary, std::ostream& os) {
  os << "rho,worst_average\n";
  for (std::size_t i = 0; i < summary.rho.size(); ++i) {
    os << format_double(summary.rho[i]) << ',' << format_double(summary.worst_averages[i]) << '\n';
  }
}

void write_trajectories_csv(const SimulationSummary& summary, std::ostream& os) {
  Index n = summary.trajectories.empty() ? 0 : summary.trajectories.front().rows();
  os << "trial,t";
  for (Index i = 0; i < n; ++i) os << ",x" << i + 1;
  os << '\n';
  for (std::size_t k = 0; k < summary.trajectories.size(); ++k) {
    const Mat& traj = summary.trajectories[k];
    for (Index t = 0; t < traj.cols(); ++t) {
      os << k << ',' << t;
      for (Index i = 0; i < traj.rows(); ++i) os << ',' << format_double(traj(i, t));
      os << '\n';
    }
  }
}

void write_robustness_csv(const RobustnessSummary& summary, std::ostream& os) {
  os << "entry,row,col,mean,stddev\n";
  for (Index j = 0; j < summary.mean.cols(); ++j) {
    for (Index i = 0; i < summary.mean.rows(); ++i) {
      os << "L" << i + 1 << '_' << j + 1 << ',' << i + 1 << ',' << j + 1 << ','
         << format_double(summary.mean(i, j)) << ',' << format_double(summary.stddev(i, j)) << '\n';
    }
  }
}

}  // namespace wsrctrl
