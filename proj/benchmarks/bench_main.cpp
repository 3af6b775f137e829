#include <random>

#include <benchmark/benchmark.h>

#include "racg/models.hpp"
#include "racg/oracle.hpp"
#include "racg/robust.hpp"
#include "racg/solvers.hpp"

using namespace racg;

namespace {

GameInstance power_game(int N, int K, Regime regime = Regime::kUniqueNe) {
  PowerScenarioParams p;
  p.players = N;
  p.dims = K;
  p.regime = regime;
  return make_power_game(generate_power_scenario(p, 1));
}

}  // namespace

static void BM_Projection(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const StrategySpace s = StrategySpace::Budget(K, 1.0, 0.3 * K);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.5, 1.0);
  Vector v(K);
  for (int k = 0; k < K; ++k) v(k) = z(rng);
  for (auto _ : state) benchmark::DoNotOptimize(s.project(v));
}
BENCHMARK(BM_Projection)->Arg(2)->Arg(8)->Arg(64);

static void BM_WorstCase(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const GameInstance g = power_game(3, K);
  const Matrix a = g.initial_profile();
  const UncertaintySpec spec = UncertaintySpec::Uniform(3, 0.3, true);
  for (auto _ : state) benchmark::DoNotOptimize(worst_case_observation(g, a, 0, spec));
}
BENCHMARK(BM_WorstCase)->Arg(2)->Arg(8)->Arg(32);

static void BM_ProximalRun(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const GameInstance g = power_game(3, K);
  const UncertaintySpec spec = UncertaintySpec::Uniform(3, 0.2, true);
  SolverConfig c;
  c.record_history = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_distributed(g, spec, c, g.initial_profile()));
}
BENCHMARK(BM_ProximalRun)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_ClosedFormProximalRun(benchmark::State& state) {
  PowerScenarioParams p;
  p.dims = static_cast<int>(state.range(0));
  const GameInstance g = power_game_as_log_theta(generate_power_scenario(p, 1));
  Matrix eps = Matrix::Constant(3, p.dims, 0.05);
  const UncertaintySpec spec = UncertaintySpec::Parameter(eps);
  SolverConfig c;
  c.record_history = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_distributed(g, spec, c, g.initial_profile()));
}
BENCHMARK(BM_ClosedFormProximalRun)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Oracle2x2(benchmark::State& state) {
  const GameInstance g = power_game(2, 2, Regime::kMultiNe);
  GridSpec grid;
  grid.points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_ne(g, grid));
}
BENCHMARK(BM_Oracle2x2)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

static void BM_JacksonProximalRun(benchmark::State& state) {
  const GameInstance g = make_jackson_game(generate_jackson_scenario(JacksonScenarioParams{}, 1));
  const UncertaintySpec spec = UncertaintySpec::Uniform(g.players(), 0.2, true);
  SolverConfig c;
  c.record_history = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_distributed(g, spec, c, g.initial_profile()));
}
BENCHMARK(BM_JacksonProximalRun)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
