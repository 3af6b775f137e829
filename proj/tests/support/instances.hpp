#pragma once

// Random game instances shared by the unit tests and the acceptance binary.

#include <cstdint>
#include <random>
#include <vector>

#include "racg/game.hpp"
#include "racg/models.hpp"

namespace racg::testing {

inline GameInstance random_log_theta_game(std::mt19937_64& rng, int N, int K, double theta) {
  std::uniform_real_distribution<double> cross(0.0, 0.3);
  std::uniform_real_distribution<double> self(0.5, 2.0);
  std::uniform_real_distribution<double> off(0.1, 1.0);
  std::uniform_real_distribution<double> cap(0.4, 1.0);
  std::vector<Matrix> x(K, Matrix::Zero(N, N));
  Matrix y(N, K);
  Matrix c(N, K);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) {
      for (int m = 0; m < N; ++m) x[k](n, m) = n == m ? self(rng) : cross(rng);
      y(n, k) = off(rng);
      c(n, k) = 0.5 * off(rng);
    }
  }
  std::vector<StrategySpace> spaces;
  for (int n = 0; n < N; ++n) spaces.push_back(StrategySpace::Budget(K, cap(rng), 0.5 * K * cap(rng)));
  return GameInstance(std::move(spaces), CouplingModel(std::move(x), std::move(y)),
                      UtilityFamily::LogTheta(theta, std::move(c)));
}

inline GameInstance random_power_game(std::mt19937_64& rng, int N, int K, double band_hi,
                                      bool high_sinr = false) {
  PowerScenarioParams p;
  p.players = N;
  p.dims = K;
  p.regime = Regime::kCustom;
  p.band_lo = 0.0;
  p.band_hi = band_hi;
  p.noise = 0.2;
  return make_power_game(generate_power_scenario(p, rng()), high_sinr);
}

inline GameInstance random_jackson_game(std::mt19937_64& rng, int N, int K) {
  JacksonScenarioParams p;
  p.nodes = N;
  p.classes = K;
  return make_jackson_game(generate_jackson_scenario(p, rng()));
}

// Uniform point of a strategy space: random box point projected.
inline Vector random_point(std::mt19937_64& rng, const StrategySpace& space) {
  Vector v(space.dims());
  for (int k = 0; k < space.dims(); ++k) {
    std::uniform_real_distribution<double> u(space.lower()(k), space.upper()(k));
    v(k) = u(rng);
  }
  return space.project(v);
}

inline Matrix random_profile(std::mt19937_64& rng, const GameInstance& game) {
  Matrix a(game.players(), game.dims());
  for (int n = 0; n < game.players(); ++n) a.row(n) = random_point(rng, game.space(n)).transpose();
  return a;
}

}  // namespace racg::testing
