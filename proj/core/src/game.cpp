#include "racg/game.hpp"

#include <cmath>
#include <random>

namespace racg {

CouplingModel::CouplingModel(std::vector<Matrix> per_dim, Matrix offsets)
    : per_dim_(std::move(per_dim)), offsets_(std::move(offsets)) {
  if (offsets_.rows() == 0 || offsets_.cols() == 0) {
    throw InfeasibleError("coupling model needs at least one player and one dimension");
  }
  if (static_cast<Eigen::Index>(per_dim_.size()) != offsets_.cols()) {
    throw InfeasibleError("coupling tensor has wrong number of dimensions");
  }
  for (const auto& x : per_dim_) {
    if (x.rows() != offsets_.rows() || x.cols() != offsets_.rows()) {
      throw InfeasibleError("coupling matrix must be N x N");
    }
    if (!x.allFinite()) throw InfeasibleError("coupling coefficients must be finite");
  }
  if (!offsets_.allFinite()) throw InfeasibleError("coupling offsets must be finite");
}

CouplingModel CouplingModel::scaled_cross(double s) const {
  std::vector<Matrix> scaled = per_dim_;
  for (auto& x : scaled) {
    const Vector diag = x.diagonal();
    x *= s;
    x.diagonal() = diag;
  }
  return CouplingModel(std::move(scaled), offsets_);
}

UtilityFamily UtilityFamily::RateLog(bool high_sinr) {
  UtilityFamily f;
  f.tag_ = FamilyTag::kRateLog;
  f.high_sinr_ = high_sinr;
  return f;
}

UtilityFamily UtilityFamily::LogTheta(double theta, Matrix offsets) {
  const bool ok = theta == 1.0 || (theta > -1.0 && theta < 0.0) || theta < -1.0;
  if (!ok || !std::isfinite(theta)) {
    throw InfeasibleError("log-theta requires theta = 1, -1 < theta < 0 or theta < -1");
  }
  if (!offsets.allFinite()) throw InfeasibleError("log-theta constants must be finite");
  UtilityFamily f;
  f.tag_ = FamilyTag::kLogTheta;
  f.theta_ = theta;
  f.params_a_ = std::move(offsets);
  return f;
}

UtilityFamily UtilityFamily::LinearJackson(Matrix service_rates, Matrix self_load) {
  if (service_rates.rows() != self_load.rows() || service_rates.cols() != self_load.cols()) {
    throw InfeasibleError("service rates and self loads must have equal shape");
  }
  if (!service_rates.allFinite() || !self_load.allFinite()) {
    throw InfeasibleError("jackson parameters must be finite");
  }
  UtilityFamily f;
  f.tag_ = FamilyTag::kLinearJackson;
  f.params_a_ = std::move(service_rates);
  f.params_b_ = std::move(self_load);
  return f;
}

std::string UtilityFamily::name() const {
  switch (tag_) {
    case FamilyTag::kRateLog:
      return high_sinr_ ? "rate-log-high-sinr" : "rate-log";
    case FamilyTag::kLogTheta:
      return "log-theta";
    case FamilyTag::kLinearJackson:
      return "linear-jackson";
  }
  return "unknown";
}

Partials UtilityFamily::evaluate(int n, int k, double a, double f, double self_coupling) const {
  Partials p;
  switch (tag_) {
    case FamilyTag::kRateLog: {
      if (!(f > 0.0)) throw DomainError("rate-log observation must be positive", k);
      if (high_sinr_) {
        if (!(a > 0.0)) throw DomainError("high-SINR rate needs a positive action", k);
        p.value = std::log(a) - std::log(f);
        p.da = 1.0 / a;
        p.df = -1.0 / f;
        p.daa = -1.0 / (a * a);
        p.dff = 1.0 / (f * f);
        p.daaa = 2.0 / (a * a * a);
        p.dfff = -2.0 / (f * f * f);
        return p;
      }
      const double s = f + a;
      if (!(s > 0.0)) throw DomainError("rate-log argument must be positive", k);
      const double s2 = s * s;
      const double s3 = s2 * s;
      p.value = std::log1p(a / f);
      p.da = 1.0 / s;
      p.df = 1.0 / s - 1.0 / f;
      p.daa = -1.0 / s2;
      p.daf = -1.0 / s2;
      p.dff = -1.0 / s2 + 1.0 / (f * f);
      p.daaa = 2.0 / s3;
      p.daaf = 2.0 / s3;
      p.daff = 2.0 / s3;
      p.dfff = 2.0 / s3 - 2.0 / (f * f * f);
      return p;
    }
    case FamilyTag::kLogTheta: {
      const double x = self_coupling;
      if (!(x > 0.0)) throw DomainError("log-theta needs a positive self coupling", k);
      const double s0 = (params_a_(n, k) + f) / x;
      const double s = a + s0;
      if (!(s0 > 0.0) || !(s > 0.0)) throw DomainError("log-theta argument must be positive", k);
      const double pw = theta_ == 1.0 ? -1.0 : theta_;
      const auto h = [&](double t) { return std::pow(t, pw); };
      const auto h1 = [&](double t) { return pw * std::pow(t, pw - 1.0); };
      const auto h2 = [&](double t) { return pw * (pw - 1.0) * std::pow(t, pw - 2.0); };
      if (theta_ == 1.0) {
        p.value = std::log(s / s0);
      } else {
        p.value = (std::pow(s, pw + 1.0) - std::pow(s0, pw + 1.0)) / (pw + 1.0);
      }
      p.da = h(s);
      p.df = (h(s) - h(s0)) / x;
      p.daa = h1(s);
      p.daf = h1(s) / x;
      p.dff = (h1(s) - h1(s0)) / (x * x);
      p.daaa = h2(s);
      p.daaf = h2(s) / x;
      p.daff = h2(s) / (x * x);
      p.dfff = (h2(s) - h2(s0)) / (x * x * x);
      return p;
    }
    case FamilyTag::kLinearJackson: {
      p.value = params_a_(n, k) - params_b_(n, k) * a - f;
      p.da = -params_b_(n, k);
      p.df = -1.0;
      return p;
    }
  }
  return p;
}

double UtilityFamily::value(int n, int k, double a, double f, double self_coupling) const {
  switch (tag_) {
    case FamilyTag::kRateLog:
      if (!(f > 0.0)) throw DomainError("rate-log observation must be positive", k);
      if (high_sinr_) {
        if (!(a > 0.0)) throw DomainError("high-SINR rate needs a positive action", k);
        return std::log(a) - std::log(f);
      }
      if (!(f + a > 0.0)) throw DomainError("rate-log argument must be positive", k);
      return std::log1p(a / f);
    case FamilyTag::kLinearJackson:
      return params_a_(n, k) - params_b_(n, k) * a - f;
    case FamilyTag::kLogTheta:
      break;
  }
  return evaluate(n, k, a, f, self_coupling).value;
}

GameInstance::GameInstance(std::vector<StrategySpace> spaces, CouplingModel coupling,
                           UtilityFamily family, bool check)
    : spaces_(std::move(spaces)), coupling_(std::move(coupling)), family_(std::move(family)) {
  const int n_players = coupling_.players();
  const int k_dims = coupling_.dims();
  if (static_cast<int>(spaces_.size()) != n_players) {
    throw InfeasibleError("one strategy space per player is required");
  }
  for (const auto& s : spaces_) {
    if (s.dims() != k_dims) throw InfeasibleError("strategy space dimension differs from K");
  }
  const auto check_shape = [&](const Matrix& m, const char* what) {
    if (m.rows() != n_players || m.cols() != k_dims) {
      throw InfeasibleError(std::string(what) + " must be N x K");
    }
  };
  switch (family_.tag()) {
    case FamilyTag::kRateLog:
      if ((coupling_.offsets().array() <= 0.0).any()) {
        throw InfeasibleError("rate-log needs positive noise offsets");
      }
      if (family_.high_sinr()) {
        for (const auto& s : spaces_) {
          if ((s.lower().array() <= 0.0).any()) {
            throw InfeasibleError("high-SINR rate needs strictly positive lower bounds");
          }
        }
      }
      break;
    case FamilyTag::kLogTheta:
      check_shape(family_.offsets(), "log-theta constants");
      for (int k = 0; k < k_dims; ++k) {
        if ((coupling_.dim(k).diagonal().array() <= 0.0).any()) {
          throw InfeasibleError("log-theta needs positive self coupling x_nn");
        }
      }
      break;
    case FamilyTag::kLinearJackson:
      check_shape(family_.service_rates(), "service rates");
      break;
  }
  if (check) check_assumptions();
}

void GameInstance::check_index(int n) const {
  if (n < 0 || n >= players()) {
    throw IndexError("player index " + std::to_string(n) + " out of range");
  }
}

Vector GameInstance::observation(const Matrix& a, int n) const {
  check_index(n);
  if (a.rows() != players() || a.cols() != dims()) throw IndexError("profile has wrong shape");
  Vector f(dims());
  for (int k = 0; k < dims(); ++k) {
    double acc = coupling_.y(n, k);
    const Matrix& x = coupling_.dim(k);
    for (int m = 0; m < players(); ++m) {
      if (m != n) acc += x(n, m) * a(m, k);
    }
    f(k) = acc;
  }
  return f;
}

double GameInstance::value_at(int n, const Vector& a_n, const Vector& f_n) const {
  double total = 0.0;
  for (int k = 0; k < dims(); ++k) {
    total += family_.value(n, k, a_n(k), f_n(k), coupling_.x(n, n, k));
  }
  return total;
}

Derivatives GameInstance::derivatives_at(int n, const Vector& a_n, const Vector& f_n) const {
  const int K = dims();
  Derivatives d;
  for (Vector* v : {&d.value, &d.da, &d.df, &d.daa, &d.daf, &d.dff, &d.daaa, &d.daaf, &d.daff,
                    &d.dfff}) {
    v->resize(K);
  }
  for (int k = 0; k < K; ++k) {
    const Partials p = family_.evaluate(n, k, a_n(k), f_n(k), coupling_.x(n, n, k));
    d.value(k) = p.value;
    d.da(k) = p.da;
    d.df(k) = p.df;
    d.daa(k) = p.daa;
    d.daf(k) = p.daf;
    d.dff(k) = p.dff;
    d.daaa(k) = p.daaa;
    d.daaf(k) = p.daaf;
    d.daff(k) = p.daff;
    d.dfff(k) = p.dfff;
  }
  return d;
}

double GameInstance::utility(const Matrix& a, int n) const {
  return value_at(n, a.row(n).transpose(), observation(a, n));
}

double GameInstance::social_utility(const Matrix& a) const {
  double total = 0.0;
  for (int n = 0; n < players(); ++n) total += utility(a, n);
  return total;
}

Derivatives GameInstance::utility_gradients(const Matrix& a, int n) const {
  return derivatives_at(n, a.row(n).transpose(), observation(a, n));
}

bool GameInstance::feasible(const Matrix& a, double tol) const {
  if (a.rows() != players() || a.cols() != dims()) return false;
  for (int n = 0; n < players(); ++n) {
    if (!spaces_[n].contains(a.row(n).transpose(), tol)) return false;
  }
  return true;
}

void GameInstance::require_feasible(const Matrix& a) const {
  if (!feasible(a)) throw InfeasibleError("strategy profile is not feasible");
}

Matrix GameInstance::initial_profile() const {
  Matrix a(players(), dims());
  for (int n = 0; n < players(); ++n) {
    const StrategySpace& s = spaces_[n];
    a.row(n) = s.project(0.5 * (s.reachable_lower() + s.reachable_upper())).transpose();
  }
  return a;
}

GameInstance GameInstance::with_coupling(CouplingModel coupling) const {
  return GameInstance(spaces_, std::move(coupling), family_, false);
}

void GameInstance::check_assumptions() const {
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  const int samples = 8;
  for (int n = 0; n < players(); ++n) {
    const StrategySpace& sp = spaces_[n];
    for (int s = 0; s < samples; ++s) {
      Matrix a(players(), dims());
      for (int m = 0; m < players(); ++m) {
        const StrategySpace& sm = spaces_[m];
        const Vector lo = sm.reachable_lower();
        const Vector hi = sm.reachable_upper();
        Vector p(dims());
        for (int k = 0; k < dims(); ++k) p(k) = lo(k) + unit(rng) * (hi(k) - lo(k));
        a.row(m) = sm.project(p).transpose();
      }
      const Vector f = observation(a, n);
      for (int k = 0; k < dims(); ++k) {
        const double x = coupling_.x(n, n, k);
        const double ak = a(n, k);
        if (ak <= sp.lower()(k)) continue;
        const auto v = [&](double aa, double ff) { return family_.value(n, k, aa, ff, x); };
        const double h1 = 1e-6 * std::max(1.0, std::abs(ak));
        const double h2 = 1e-4 * std::max(1.0, std::abs(ak));
        const auto fstep = [&](double rel) {
          const double h = rel * std::max(1.0, std::abs(f(k)));
          return f(k) != 0.0 ? std::min(h, 0.5 * std::abs(f(k))) : h;
        };
        const double hf1 = fstep(1e-6);
        const double hf2 = fstep(1e-4);
        const double v0 = v(ak, f(k));
        const double tol2 = 1e-6 * (1.0 + std::abs(v0));
        if (!family_.increasing_waived() && !(v(ak + h1, f(k)) - v(ak - h1, f(k)) > 0.0)) {
          throw InfeasibleError("utility is not increasing in own action (A1), player " +
                                std::to_string(n));
        }
        if ((v(ak + h2, f(k)) - 2.0 * v0 + v(ak - h2, f(k))) / (h2 * h2) > tol2) {
          throw InfeasibleError("utility is not concave in own action (A1), player " +
                                std::to_string(n));
        }
        if (!(v(ak, f(k) + hf1) - v(ak, f(k) - hf1) < 0.0)) {
          throw InfeasibleError("utility is not decreasing in the observation (A2), player " +
                                std::to_string(n));
        }
        if ((v(ak, f(k) + hf2) - 2.0 * v0 + v(ak, f(k) - hf2)) / (hf2 * hf2) < -tol2) {
          throw InfeasibleError("utility is not convex in the observation (A2), player " +
                                std::to_string(n));
        }
      }
    }
  }
}

}  // namespace racg
