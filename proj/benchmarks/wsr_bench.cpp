#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "wsrctrl/wsrctrl.hpp"

namespace {

using namespace wsrctrl;

std::shared_ptr<const SampleBank> plant_bank(Index n) {
  return std::make_shared<const SampleBank>(draw_bank(example_plant_distribution(), n, 42));
}

WeightSpec rrsl(double theta) {
  WeightSpec w;
  w.family = WeightFamily::RRSL;
  w.theta = theta;
  return w;
}

const SymMat kQ(Mat::Identity(2, 2) * 3.0);
const SymMat kR(Mat::Ones(1, 1));
const SymMat kP((Mat(2, 2) << 812.0, 255.0, 255.0, 655.0).finished());
const Mat kL = (Mat(1, 2) << 6.57, 7.18).finished();

void BM_ValueMap(benchmark::State& state) {
  const DesignProblem problem(plant_bank(state.range(0)), kQ, kR, rrsl(static_cast<double>(state.range(1))));
  for (auto _ : state) benchmark::DoNotOptimize(value_map(kP, kL, problem));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ValueMap)->Args({1000, 0})->Args({10000, 0})->Args({10000, 1})->Unit(benchmark::kMicrosecond);

void BM_PredictiveCosts(benchmark::State& state) {
  auto bank = plant_bank(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(predictive_costs(*bank, kL, kP, SymMat::Identity(2), kQ, kR));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictiveCosts)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_FixedPointSolve(benchmark::State& state) {
  const DesignProblem problem(plant_bank(state.range(0)), kQ, kR, rrsl(1.0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(problem, SolverOptions{}));
}
BENCHMARK(BM_FixedPointSolve)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_NewtonStep(benchmark::State& state) {
  const DesignProblem problem(plant_bank(10000), kQ, kR, rrsl(1.0));
  const Vec z = pack(kP, kL);
  for (auto _ : state) benchmark::DoNotOptimize(jacobian_h(z, problem, JacobianMode::FiniteDifference));
}
BENCHMARK(BM_NewtonStep)->Unit(benchmark::kMillisecond);

void BM_Rollout(benchmark::State& state) {
  const ParameterDistribution dist = example_plant_distribution();
  const CostWeights cost{kQ, kR};
  const Vec x0 = Vec::Ones(2);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(dist, kL, x0, static_cast<int>(state.range(0)), cost, seed++));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rollout)->Arg(300)->Unit(benchmark::kMicrosecond);

void BM_SpectralRadius(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  const Index n = state.range(0);
  Mat m(n, n);
  for (Index i = 0; i < m.size(); ++i) m(i) = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(m));
}
BENCHMARK(BM_SpectralRadius)->Arg(3)->Arg(10)->Arg(55)->Unit(benchmark::kMicrosecond);

void BM_MsRadius(benchmark::State& state) {
  auto bank = plant_bank(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ms_radius(*bank, kL));
}
BENCHMARK(BM_MsRadius)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
