#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "racg/models.hpp"
#include "racg/oracle.hpp"
#include "racg/solvers.hpp"

using namespace racg;

namespace {

GameInstance decoupled_pair() {
  std::vector<Matrix> x(2, Matrix::Identity(2, 2));
  Matrix y(2, 2);
  y << 0.2, 0.5, 0.6, 0.3;
  std::vector<StrategySpace> spaces(2, StrategySpace::Budget(2, 1.0, 1.0));
  return GameInstance(spaces, CouplingModel(x, y), UtilityFamily::RateLog());
}

GameInstance power_pair(Regime regime, std::uint64_t seed) {
  PowerScenarioParams p;
  p.players = 2;
  p.dims = 2;
  p.regime = regime;
  return make_power_game(generate_power_scenario(p, seed));
}

Matrix solve(const GameInstance& g, const UncertaintySpec& spec) {
  SolverConfig c;
  c.tolerance = 1e-10;
  return run_distributed(g, spec, c, g.initial_profile()).final_profile();
}

// Smallest infinity-norm distance between cell points of two oracle results.
double cell_gap(const OracleResult& a, const OracleResult& b) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.equilibria.size(); ++i) {
    if (a.cell[i] < 0) continue;
    best = std::min(best, oracle_distance(b, a.equilibria[i]));
  }
  return best;
}

}  // namespace

TEST(PlayerGrid, FeasiblePointsOnly) {
  const StrategySpace s = StrategySpace::Budget(2, 1.0, 1.0);
  const PlayerGrid g = player_grid(s, 11);
  EXPECT_EQ(g.points.size(), 66u);  // i + j <= 10
  for (const Vector& p : g.points) EXPECT_TRUE(s.contains(p));
  EXPECT_NEAR(g.spacing, 0.1, 1e-15);
  EXPECT_THROW(player_grid(s, 2), InfeasibleError);
}

TEST(BruteForceNe, DecoupledIsProductOfArgmaxima) {
  const GameInstance g = decoupled_pair();
  GridSpec grid;
  grid.points = 11;
  grid.tolerance = 1e-12;
  const OracleResult r = brute_force_ne(g, grid);
  // per-user grid argmax sets, found independently (this instance has exact ties)
  const PlayerGrid pg = player_grid(g.space(0), 11);
  std::vector<std::vector<Vector>> arg(2);
  for (int n = 0; n < 2; ++n) {
    const Vector f = g.coupling().offsets().row(n).transpose();
    double best = -1;
    for (const Vector& p : pg.points) best = std::max(best, g.value_at(n, p, f));
    for (const Vector& p : pg.points)
      if (g.value_at(n, p, f) >= best - 1e-12) arg[n].push_back(p);
  }
  ASSERT_EQ(r.equilibria.size(), arg[0].size() * arg[1].size());
  for (const Matrix& e : r.equilibria) {
    for (int n = 0; n < 2; ++n) {
      bool found = false;
      for (const Vector& p : arg[n]) found |= e.row(n).transpose().isApprox(p);
      EXPECT_TRUE(found);
    }
  }
}

TEST(BruteForceNe, LowInterferenceSingleCellHoldsSolverOutput) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const GameInstance g = power_pair(Regime::kUniqueNe, seed);
    const OracleResult r = brute_force_ne(g);
    EXPECT_EQ(r.clusters, 1);
    EXPECT_TRUE(oracle_contains(r, solve(g, UncertaintySpec::None(2))));
  }
}

TEST(BruteForceNe, MultiRegimeHasSeveralCells) {
  int multi = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) multi += brute_force_ne(power_pair(Regime::kMultiNe, seed)).clusters >= 2;
  EXPECT_GE(multi, 3);
}

TEST(BruteForceNe, JointCapEnforced) {
  GridSpec grid;
  grid.max_joint = 100;
  EXPECT_THROW(brute_force_ne(decoupled_pair(), grid), InfeasibleError);
}

TEST(BruteForceRne, ZeroRadiusMatchesNe) {
  const GameInstance g = power_pair(Regime::kMultiNe, 2);
  const OracleResult ne = brute_force_ne(g);
  const OracleResult rne = brute_force_rne(g, UncertaintySpec::Uniform(2, 0.0, true));
  ASSERT_EQ(ne.equilibria.size(), rne.equilibria.size());
  EXPECT_EQ(ne.joint_index, rne.joint_index);
  EXPECT_EQ(ne.cell, rne.cell);
}

TEST(BruteForceRne, SmallRadiusCellWithinBound) {
  const GameInstance g = power_pair(Regime::kUniqueNe, 4);
  const Vector eps = Vector::Constant(2, 0.05);
  const UncertaintySpec spec = UncertaintySpec::Observation(eps, true);
  const OracleResult ne = brute_force_ne(g);
  const OracleResult rne = brute_force_rne(g, spec);
  const double bound = theorem2_distance_bound(observation_delta(g, eps, true), build_upsilon(g).c_sm);
  EXPECT_LE(cell_gap(rne, ne), bound + ne.spacing);
}

TEST(BruteForceRne, SolverOutputInsideCell) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const GameInstance g = power_pair(Regime::kUniqueNe, seed);
    const UncertaintySpec spec = UncertaintySpec::Uniform(2, 0.2, true);
    EXPECT_TRUE(oracle_contains(brute_force_rne(g, spec), solve(g, spec)));
  }
}

TEST(SaddleCheck, DecoupledPasses) {
  const GameInstance g = decoupled_pair();
  const UncertaintySpec spec = UncertaintySpec::Uniform(2, 0.05);
  const Matrix a = solve(g, spec);
  for (int n = 0; n < 2; ++n)
    EXPECT_TRUE(saddle_check(g, spec, a, n, worst_case_observation(g, a, n, spec).observation, 1e-3));
}

TEST(SaddleCheck, PerturbedActionFails) {
  const GameInstance g = decoupled_pair();
  const UncertaintySpec spec = UncertaintySpec::Uniform(2, 0.05);
  const Matrix a = solve(g, spec);
  const Vector f = worst_case_observation(g, a, 0, spec).observation;
  Matrix b = a;
  b(0, 0) += 0.1;
  b(0, 1) -= 0.1;
  EXPECT_FALSE(saddle_check(g, spec, b, 0, f, 1e-3));
}

TEST(SaddleCheck, SeededPairPasses) {
  const GameInstance g = power_pair(Regime::kUniqueNe, 5);
  const UncertaintySpec spec = UncertaintySpec::Uniform(2, 0.2, true);
  const Matrix a = solve(g, spec);
  for (int n = 0; n < 2; ++n)
    EXPECT_TRUE(saddle_check(g, spec, a, n, worst_case_observation(g, a, n, spec).observation, 1e-3));
}

TEST(WorstCaseGrid, ScalarTwoPoints) {
  std::vector<Matrix> x{Matrix::Ones(1, 1)};
  const GameInstance g({StrategySpace::Budget(1, 1.0, 1.0)}, CouplingModel(x, Matrix::Ones(1, 1)),
                       UtilityFamily::RateLog());
  const BoundaryMinimum m = worst_case_grid(g, 0, Vector::Ones(1), Vector::Ones(1), 0.5);
  EXPECT_NEAR(m.value, std::log(1 + 1 / 1.5), 1e-15);
  EXPECT_NEAR(m.observation(0), 1.5, 1e-15);
}

TEST(FiniteDifference, Quadratic) {
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  const Vector g = finite_difference_gradient([](const Vector& v) { return v.squaredNorm(); }, x);
  EXPECT_LE((g - 2 * x).cwiseAbs().maxCoeff(), 1e-8);
}
