#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "racg/game.hpp"

namespace racg {

enum class Regime { kUniqueNe, kMultiNe, kModerate, kHigh, kCustom };

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);

struct PowerControlScenario {
  int players = 0;
  int dims = 0;
  std::vector<Matrix> gain;  // gain[k](n, m): from transmitter m to receiver n; diagonal direct
  Matrix noise;              // sigma(n, k)
  Vector power_max;          // per-user budget a_n^max
  Matrix power_cap;          // per-dimension cap a_{n,k}^max
  Regime regime = Regime::kCustom;
  std::uint64_t seed = 0;

  // h_bar[k](n, m) = gain / direct gain, unit diagonal.
  std::vector<Matrix> normalized_gain() const;
  // sigma_bar(n, k) = noise / direct gain.
  Matrix normalized_noise() const;
  void validate() const;
};

struct PowerScenarioParams {
  int players = 3;
  int dims = 8;
  Regime regime = Regime::kUniqueNe;
  double band_lo = 0.0;  // used by kCustom
  double band_hi = 0.01;
  double noise = 0.5;  // normalized noise sigma_bar, same on every sub-channel
  double power_max = 1.0;
  double power_cap = 1.0;
};

// Interval the normalized cross gains of a regime are mapped into.
std::pair<double, double> regime_band(const PowerScenarioParams& params);

PowerControlScenario generate_power_scenario(const PowerScenarioParams& params, std::uint64_t seed);
std::vector<PowerControlScenario> generate_power_scenarios(const PowerScenarioParams& params,
                                                           int count, std::uint64_t seed);

// Rate-log game x = h_bar, y = sigma_bar.
GameInstance make_power_game(const PowerControlScenario& s, bool high_sinr = false);
// The same power game expressed in the log-theta family (theta = 1, c = 0, x_nn = 1).
GameInstance power_game_as_log_theta(const PowerControlScenario& s);
// Cross gains scaled by factor (diagonal untouched).
PowerControlScenario scale_cross_gains(const PowerControlScenario& s, double factor);

// Closed-form uniqueness condition: Upsilon of the rate-log game is a P-matrix.
bool power_uniqueness_condition(const PowerControlScenario& s);

struct JacksonScenario {
  int nodes = 0;
  int classes = 0;
  std::vector<Matrix> routing;  // routing[k](n, m) = probability m -> n
  Matrix service_rate;          // mu(n, k)
  Vector min_rate;              // psi_n^min
  Matrix rate_cap;              // per-class upper bound on psi(n, k)
  std::uint64_t seed = 0;

  // Theta^k = (I - R^k)^{-1}.
  std::vector<Matrix> theta() const;
  // r_{m0}^k = 1 - sum_n r_nm^k.
  Matrix exit_probability() const;
  void validate() const;
};

struct JacksonScenarioParams {
  int nodes = 5;
  int classes = 3;
  double routing_total = 0.3;  // 1 - r_{m0}, identical for every column
  double mu_lo = 2.0;
  double mu_hi = 5.0;
  double min_rate_lo = 0.1;    // per class
  double min_rate_hi = 0.5;
  double cap_factor = 2.0;     // per-class cap as a multiple of psi_n^min
};

JacksonScenario generate_jackson_scenario(const JacksonScenarioParams& params, std::uint64_t seed);
std::vector<JacksonScenario> generate_jackson_scenarios(const JacksonScenarioParams& params,
                                                        int count, std::uint64_t seed);

// Linear-jackson game with x = nu off the diagonal and lower-sum spaces.
GameInstance make_jackson_game(const JacksonScenario& s);

// load(n, k) = sum_m nu_nm^k psi(m, k).
Matrix node_loads(const JacksonScenario& s, const Matrix& psi);
// Sum over nodes and classes of 1 / (mu - load); UnstableError within 1e-6 of the singularity.
double total_delay_from_loads(const JacksonScenario& s, const Matrix& loads);
double total_delay(const JacksonScenario& s, const Matrix& psi);
// 100 (d - d_star) / d_star.
double delay_excess_percent(double d, double d_star);

}  // namespace racg
