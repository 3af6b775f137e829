#include <cmath>

#include <gtest/gtest.h>

#include "racg/models.hpp"
#include "racg/vi.hpp"

using namespace racg;

namespace {

JacksonScenario hand_network(const Matrix& routing) {
  JacksonScenario s;
  s.nodes = static_cast<int>(routing.rows());
  s.classes = 1;
  s.routing = {routing};
  s.service_rate = Matrix::Constant(s.nodes, 1, 2.0);
  s.min_rate = Vector::Constant(s.nodes, 0.1);
  s.rate_cap = Matrix::Constant(s.nodes, 1, 1.0);
  return s;
}

}  // namespace

TEST(PowerModel, SingleUserIsUncoupled) {
  PowerScenarioParams p;
  p.players = 1;
  p.dims = 4;
  const GameInstance g = make_power_game(generate_power_scenario(p, 7));
  EXPECT_EQ(g.players(), 1);
  const Matrix a = g.initial_profile();
  EXPECT_TRUE(g.observation(a, 0).isApprox(g.coupling().offsets().row(0).transpose()));
}

TEST(PowerModel, UniqueRegimeIsMostlyPMatrix) {
  int p_matrix = 0;
  for (int seed = 1; seed <= 100; ++seed)
    p_matrix += build_upsilon(make_power_game(generate_power_scenario(PowerScenarioParams{}, seed))).p_matrix;
  EXPECT_GE(p_matrix, 95);
}

TEST(PowerModel, StrongCrossGainsBreakUniqueness) {
  PowerScenarioParams p;
  p.players = 2;
  p.dims = 2;
  p.regime = Regime::kCustom;
  p.band_lo = 0.6;
  p.band_hi = 1.0;
  p.noise = 0.05;
  for (int seed = 1; seed <= 10; ++seed) {
    const PowerControlScenario s = generate_power_scenario(p, seed);
    EXPECT_FALSE(power_uniqueness_condition(s));
    EXPECT_FALSE(build_upsilon(make_power_game(s)).p_matrix);
  }
}

TEST(PowerModel, LogThetaFormHasSameUtility) {
  PowerScenarioParams p;
  p.regime = Regime::kModerate;
  const PowerControlScenario s = generate_power_scenario(p, 3);
  const GameInstance rate = make_power_game(s);
  const GameInstance lt = power_game_as_log_theta(s);
  const Matrix a = rate.initial_profile();
  for (int n = 0; n < s.players; ++n) EXPECT_NEAR(rate.utility(a, n), lt.utility(a, n), 1e-12);
}

TEST(PowerModel, ScaleCrossGainsKeepsDiagonal) {
  const PowerControlScenario s = generate_power_scenario(PowerScenarioParams{}, 5);
  const PowerControlScenario t = scale_cross_gains(s, 1.5);
  for (int k = 0; k < s.dims; ++k) {
    EXPECT_TRUE(t.gain[k].diagonal().isApprox(s.gain[k].diagonal()));
    for (int n = 0; n < s.players; ++n)
      for (int m = 0; m < s.players; ++m)
        if (n != m) EXPECT_NEAR(t.gain[k](n, m), 1.5 * s.gain[k](n, m), 1e-15);
  }
}

TEST(Generator, Deterministic) {
  PowerScenarioParams p;
  p.regime = Regime::kHigh;
  const PowerControlScenario a = generate_power_scenario(p, 42);
  const PowerControlScenario b = generate_power_scenario(p, 42);
  for (int k = 0; k < p.dims; ++k) EXPECT_EQ(a.gain[k], b.gain[k]);
  EXPECT_EQ(a.noise, b.noise);
  const JacksonScenario c = generate_jackson_scenario(JacksonScenarioParams{}, 42);
  const JacksonScenario d = generate_jackson_scenario(JacksonScenarioParams{}, 42);
  for (int k = 0; k < c.classes; ++k) EXPECT_EQ(c.routing[k], d.routing[k]);
  EXPECT_EQ(c.service_rate, d.service_rate);
  EXPECT_EQ(c.min_rate, d.min_rate);
}

TEST(Generator, RegimeBandsHold) {
  for (const Regime r : {Regime::kUniqueNe, Regime::kMultiNe, Regime::kModerate, Regime::kHigh}) {
    PowerScenarioParams p;
    p.regime = r;
    const auto [lo, hi] = regime_band(p);
    for (int seed = 1; seed <= 20; ++seed) {
      const auto h = generate_power_scenario(p, seed).normalized_gain();
      for (const Matrix& hk : h)
        for (int n = 0; n < p.players; ++n)
          for (int m = 0; m < p.players; ++m) {
            if (n == m) continue;
            EXPECT_GE(hk(n, m), lo);
            if (r == Regime::kUniqueNe) EXPECT_LT(hk(n, m), 0.01); else EXPECT_LE(hk(n, m), hi);
          }
    }
  }
}

TEST(Generator, EqualNormalizedNoise) {
  const PowerControlScenario s = generate_power_scenario(PowerScenarioParams{}, 9);
  EXPECT_LE((s.normalized_noise().array() - 0.5).abs().maxCoeff(), 1e-12);
}

TEST(Generator, RoutingDeficit) {
  JacksonScenarioParams p;
  p.routing_total = 0.5;
  for (int seed = 1; seed <= 10; ++seed) {
    const JacksonScenario s = generate_jackson_scenario(p, seed);
    const Matrix exit = s.exit_probability();
    EXPECT_LE((exit.array() - 0.5).abs().maxCoeff(), 1e-12);
  }
}

TEST(Generator, RegimeNamesRoundTrip) {
  for (const Regime r : {Regime::kUniqueNe, Regime::kMultiNe, Regime::kModerate, Regime::kHigh, Regime::kCustom})
    EXPECT_EQ(regime_from_name(regime_name(r)), r);
  EXPECT_THROW(regime_from_name("nope"), Error);
}

TEST(Jackson, NoRoutingThetaIsIdentity) {
  const JacksonScenario s = hand_network(Matrix::Zero(3, 3));
  EXPECT_TRUE(s.theta()[0].isApprox(Matrix::Identity(3, 3)));
}

TEST(Jackson, TwoNodeInverse) {
  Matrix r(2, 2);
  r << 0.0, 0.5, 0.0, 0.0;
  Matrix expected(2, 2);
  expected << 1.0, 0.5, 0.0, 1.0;
  EXPECT_TRUE(hand_network(r).theta()[0].isApprox(expected));
}

TEST(Jackson, DelayTerm) {
  const JacksonScenario s = hand_network(Matrix::Zero(1, 1));
  EXPECT_DOUBLE_EQ(total_delay_from_loads(s, Matrix::Ones(1, 1)), 1.0);
  EXPECT_THROW(total_delay_from_loads(s, Matrix::Constant(1, 1, 2.0)), UnstableError);
  EXPECT_NEAR(delay_excess_percent(1.1, 1.0), 10.0, 1e-12);
}

TEST(Jackson, LoadsFollowTheta) {
  Matrix r(2, 2);
  r << 0.0, 0.5, 0.0, 0.0;
  const JacksonScenario s = hand_network(r);
  Matrix psi(2, 1);
  psi << 0.2, 0.4;
  const Matrix loads = node_loads(s, psi);
  EXPECT_NEAR(loads(0, 0), 0.4, 1e-14);
  EXPECT_NEAR(loads(1, 0), 0.4, 1e-14);
  EXPECT_NEAR(total_delay(s, psi), 2.0 / 1.6, 1e-14);
}

TEST(Jackson, GameUsesLowerSumSpaces) {
  const JacksonScenario s = generate_jackson_scenario(JacksonScenarioParams{}, 2);
  const GameInstance g = make_jackson_game(s);
  for (int n = 0; n < s.nodes; ++n) {
    EXPECT_EQ(g.space(n).direction(), SumDirection::kAtLeast);
    EXPECT_DOUBLE_EQ(g.space(n).sum_bound(), s.min_rate(n));
  }
  EXPECT_TRUE(g.family().increasing_waived());
}
