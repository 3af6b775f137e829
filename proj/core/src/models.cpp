#include "racg/models.hpp"

#include <cmath>
#include <random>

#include "racg/vi.hpp"

namespace racg {

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::kUniqueNe:
      return "unique";
    case Regime::kMultiNe:
      return "multi";
    case Regime::kModerate:
      return "moderate";
    case Regime::kHigh:
      return "high";
    case Regime::kCustom:
      return "custom";
  }
  return "custom";
}

Regime regime_from_name(const std::string& name) {
  if (name == "unique") return Regime::kUniqueNe;
  if (name == "multi") return Regime::kMultiNe;
  if (name == "moderate") return Regime::kModerate;
  if (name == "high") return Regime::kHigh;
  if (name == "custom") return Regime::kCustom;
  throw InfeasibleError("unknown regime '" + name + "'");
}

std::vector<Matrix> PowerControlScenario::normalized_gain() const {
  std::vector<Matrix> out(dims);
  for (int k = 0; k < dims; ++k) {
    out[k] = gain[k];
    for (int n = 0; n < players; ++n) out[k].row(n) /= gain[k](n, n);
  }
  return out;
}

Matrix PowerControlScenario::normalized_noise() const {
  Matrix out(players, dims);
  for (int n = 0; n < players; ++n) {
    for (int k = 0; k < dims; ++k) out(n, k) = noise(n, k) / gain[k](n, n);
  }
  return out;
}

void PowerControlScenario::validate() const {
  if (players < 1 || dims < 1) throw InfeasibleError("power scenario needs N >= 1 and K >= 1");
  if (static_cast<int>(gain.size()) != dims) throw InfeasibleError("one gain matrix per dimension");
  for (const auto& g : gain) {
    if (g.rows() != players || g.cols() != players) throw InfeasibleError("gain matrix must be N x N");
    if (!g.allFinite() || (g.array() < 0.0).any()) throw InfeasibleError("gains must be finite and >= 0");
    if ((g.diagonal().array() <= 0.0).any()) throw InfeasibleError("direct gains must be positive");
  }
  if (noise.rows() != players || noise.cols() != dims || (noise.array() <= 0.0).any()) {
    throw InfeasibleError("noise must be N x K and positive");
  }
  if (power_max.size() != players || (power_max.array() <= 0.0).any()) {
    throw InfeasibleError("power budgets must be positive");
  }
  if (power_cap.rows() != players || power_cap.cols() != dims || (power_cap.array() <= 0.0).any()) {
    throw InfeasibleError("per-dimension caps must be N x K and positive");
  }
}

std::pair<double, double> regime_band(const PowerScenarioParams& params) {
  switch (params.regime) {
    case Regime::kUniqueNe:
      return {0.0, 0.01};
    case Regime::kMultiNe:
      return {1.5, 3.0};
    case Regime::kModerate:
      return {0.8, 1.2};
    case Regime::kHigh:
      return {5.0, 20.0};
    case Regime::kCustom:
      break;
  }
  return {params.band_lo, params.band_hi};
}

PowerControlScenario generate_power_scenario(const PowerScenarioParams& params, std::uint64_t seed) {
  if (params.players < 1 || params.dims < 1) throw InfeasibleError("need N >= 1 and K >= 1");
  const auto [lo, hi] = regime_band(params);
  if (!(lo >= 0.0 && hi > lo)) throw InfeasibleError("invalid cross-gain band");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const auto rayleigh_power = [&]() {
    const double re = normal(rng);
    const double im = normal(rng);
    return re * re + im * im;
  };
  PowerControlScenario s;
  s.players = params.players;
  s.dims = params.dims;
  s.regime = params.regime;
  s.seed = seed;
  s.gain.assign(params.dims, Matrix::Zero(params.players, params.players));
  for (int k = 0; k < params.dims; ++k) {
    for (int n = 0; n < params.players; ++n) {
      // Deep fades are floored so normalized noise stays bounded.
      s.gain[k](n, n) = std::max(0.05, rayleigh_power());
    }
    for (int n = 0; n < params.players; ++n) {
      for (int m = 0; m < params.players; ++m) {
        if (m == n) continue;
        const double ratio = rayleigh_power() / s.gain[k](n, n);
        const double hbar = lo + (hi - lo) * ratio / (1.0 + ratio);
        s.gain[k](n, m) = hbar * s.gain[k](n, n);
      }
    }
  }
  // equal normalized noise on every sub-channel of a user
  s.noise.resize(params.players, params.dims);
  for (int k = 0; k < params.dims; ++k) {
    for (int n = 0; n < params.players; ++n) s.noise(n, k) = params.noise * s.gain[k](n, n);
  }
  s.power_max = Vector::Constant(params.players, params.power_max);
  s.power_cap = Matrix::Constant(params.players, params.dims, params.power_cap);
  s.validate();
  return s;
}

std::vector<PowerControlScenario> generate_power_scenarios(const PowerScenarioParams& params,
                                                           int count, std::uint64_t seed) {
  std::vector<PowerControlScenario> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(generate_power_scenario(params, seed + i));
  return out;
}

namespace {

std::vector<StrategySpace> power_spaces(const PowerControlScenario& s, double lower_fraction) {
  std::vector<StrategySpace> spaces;
  for (int n = 0; n < s.players; ++n) {
    Vector hi = s.power_cap.row(n).transpose().cwiseMin(s.power_max(n));
    Vector lo = lower_fraction * hi;
    spaces.emplace_back(lo, hi, s.power_max(n));
  }
  return spaces;
}

}  // namespace

GameInstance make_power_game(const PowerControlScenario& s, bool high_sinr) {
  s.validate();
  // High-SINR rates diverge at zero power, so that variant keeps a small floor.
  return GameInstance(power_spaces(s, high_sinr ? 0.01 : 0.0),
                      CouplingModel(s.normalized_gain(), s.normalized_noise()),
                      UtilityFamily::RateLog(high_sinr));
}

GameInstance power_game_as_log_theta(const PowerControlScenario& s) {
  s.validate();
  return GameInstance(power_spaces(s, 0.0), CouplingModel(s.normalized_gain(), s.normalized_noise()),
                      UtilityFamily::LogTheta(1.0, Matrix::Zero(s.players, s.dims)));
}

PowerControlScenario scale_cross_gains(const PowerControlScenario& s, double factor) {
  PowerControlScenario out = s;
  for (auto& g : out.gain) {
    const Vector d = g.diagonal();
    g *= factor;
    g.diagonal() = d;
  }
  out.regime = Regime::kCustom;
  return out;
}

bool power_uniqueness_condition(const PowerControlScenario& s) {
  return build_upsilon(make_power_game(s)).p_matrix;
}

std::vector<Matrix> JacksonScenario::theta() const {
  std::vector<Matrix> out;
  out.reserve(classes);
  for (int k = 0; k < classes; ++k) {
    out.push_back((Matrix::Identity(nodes, nodes) - routing[k]).inverse());
  }
  return out;
}

Matrix JacksonScenario::exit_probability() const {
  Matrix out(nodes, classes);
  for (int k = 0; k < classes; ++k) {
    for (int m = 0; m < nodes; ++m) out(m, k) = 1.0 - routing[k].col(m).sum();
  }
  return out;
}

void JacksonScenario::validate() const {
  if (nodes < 1 || classes < 1) throw InfeasibleError("jackson scenario needs N >= 1 and K >= 1");
  if (static_cast<int>(routing.size()) != classes) throw InfeasibleError("one routing matrix per class");
  for (const auto& r : routing) {
    if (r.rows() != nodes || r.cols() != nodes) throw InfeasibleError("routing matrix must be N x N");
    if (!r.allFinite() || (r.array() < 0.0).any()) throw InfeasibleError("routing must be >= 0");
    for (int m = 0; m < nodes; ++m) {
      if (r.col(m).sum() > 1.0 + 1e-12) throw InfeasibleError("routing column sums exceed 1");
    }
    Eigen::EigenSolver<Matrix> es(r, false);
    if (es.eigenvalues().cwiseAbs().maxCoeff() >= 1.0) {
      throw InfeasibleError("routing spectral radius must be below 1");
    }
  }
  if (service_rate.rows() != nodes || service_rate.cols() != classes ||
      (service_rate.array() <= 0.0).any()) {
    throw InfeasibleError("service rates must be N x K and positive");
  }
  if (min_rate.size() != nodes || (min_rate.array() < 0.0).any()) {
    throw InfeasibleError("minimum rates must be nonnegative");
  }
  if (rate_cap.rows() != nodes || rate_cap.cols() != classes) {
    throw InfeasibleError("rate caps must be N x K");
  }
  for (int n = 0; n < nodes; ++n) {
    if (rate_cap.row(n).sum() < min_rate(n)) throw InfeasibleError("rate caps cannot meet minimum rate");
  }
}

JacksonScenario generate_jackson_scenario(const JacksonScenarioParams& params, std::uint64_t seed) {
  if (params.nodes < 1 || params.classes < 1) throw InfeasibleError("need N >= 1 and K >= 1");
  if (!(params.routing_total >= 0.0 && params.routing_total < 1.0)) {
    throw InfeasibleError("routing total must lie in [0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  JacksonScenario s;
  s.nodes = params.nodes;
  s.classes = params.classes;
  s.seed = seed;
  s.routing.assign(params.classes, Matrix::Zero(params.nodes, params.nodes));
  for (int k = 0; k < params.classes; ++k) {
    for (int m = 0; m < params.nodes; ++m) {
      double total = 0.0;
      for (int n = 0; n < params.nodes; ++n) {
        if (n == m) continue;
        s.routing[k](n, m) = 0.05 + unit(rng);
        total += s.routing[k](n, m);
      }
      if (total > 0.0) s.routing[k].col(m) *= params.routing_total / total;
    }
  }
  s.service_rate.resize(params.nodes, params.classes);
  for (int n = 0; n < params.nodes; ++n) {
    for (int k = 0; k < params.classes; ++k) {
      s.service_rate(n, k) = params.mu_lo + (params.mu_hi - params.mu_lo) * unit(rng);
    }
  }
  s.min_rate.resize(params.nodes);
  for (int n = 0; n < params.nodes; ++n) {
    s.min_rate(n) = params.min_rate_lo + (params.min_rate_hi - params.min_rate_lo) * unit(rng);
  }
  s.rate_cap = (params.cap_factor * s.min_rate).replicate(1, params.classes);
  s.validate();
  return s;
}

std::vector<JacksonScenario> generate_jackson_scenarios(const JacksonScenarioParams& params,
                                                        int count, std::uint64_t seed) {
  std::vector<JacksonScenario> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(generate_jackson_scenario(params, seed + i));
  return out;
}

GameInstance make_jackson_game(const JacksonScenario& s) {
  s.validate();
  const std::vector<Matrix> nu = s.theta();
  Matrix self(s.nodes, s.classes);
  for (int k = 0; k < s.classes; ++k) self.col(k) = nu[k].diagonal();
  std::vector<StrategySpace> spaces;
  for (int n = 0; n < s.nodes; ++n) {
    spaces.emplace_back(Vector::Zero(s.classes), s.rate_cap.row(n).transpose(), s.min_rate(n),
                        SumDirection::kAtLeast);
  }
  return GameInstance(std::move(spaces), CouplingModel(nu, Matrix::Zero(s.nodes, s.classes)),
                      UtilityFamily::LinearJackson(s.service_rate, self));
}

Matrix node_loads(const JacksonScenario& s, const Matrix& psi) {
  if (psi.rows() != s.nodes || psi.cols() != s.classes) throw IndexError("rate profile has wrong shape");
  const std::vector<Matrix> nu = s.theta();
  Matrix loads(s.nodes, s.classes);
  for (int k = 0; k < s.classes; ++k) loads.col(k) = nu[k] * psi.col(k);
  return loads;
}

double total_delay_from_loads(const JacksonScenario& s, const Matrix& loads) {
  double total = 0.0;
  for (int n = 0; n < s.nodes; ++n) {
    for (int k = 0; k < s.classes; ++k) {
      const double slack = s.service_rate(n, k) - loads(n, k);
      if (slack <= 1e-6) throw UnstableError(n, k);
      total += 1.0 / slack;
    }
  }
  return total;
}

double total_delay(const JacksonScenario& s, const Matrix& psi) {
  return total_delay_from_loads(s, node_loads(s, psi));
}

double delay_excess_percent(double d, double d_star) {
  return 100.0 * (d - d_star) / d_star;
}

}  // namespace racg
