#include "racg/robust.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace racg {

UncertaintySpec UncertaintySpec::None(int players) {
  return Observation(Vector::Zero(players));
}

UncertaintySpec UncertaintySpec::Observation(Vector eps, bool relative) {
  UncertaintySpec s;
  s.mode = UncertaintyMode::kObservation;
  s.radius = std::move(eps);
  s.relative = relative;
  return s;
}

UncertaintySpec UncertaintySpec::Uniform(int players, double eps, bool relative) {
  return Observation(Vector::Constant(players, eps), relative);
}

UncertaintySpec UncertaintySpec::Parameter(Matrix eps) {
  UncertaintySpec s;
  s.mode = UncertaintyMode::kParameter;
  s.param_radius = std::move(eps);
  return s;
}

bool UncertaintySpec::is_zero() const {
  if (mode == UncertaintyMode::kObservation) return radius.size() == 0 || radius.isZero(0.0);
  return param_radius.size() == 0 || param_radius.isZero(0.0);
}

void UncertaintySpec::validate(const GameInstance& game) const {
  if (mode == UncertaintyMode::kObservation) {
    if (radius.size() != game.players()) throw IndexError("one radius per player is required");
    if (!radius.allFinite() || (radius.array() < 0.0).any()) {
      throw InfeasibleError("uncertainty radii must be finite and nonnegative");
    }
    return;
  }
  if (game.family().tag() != FamilyTag::kLogTheta) {
    throw InfeasibleError("parameter-level uncertainty needs the log-theta family");
  }
  if (param_radius.rows() != game.players() || param_radius.cols() != game.dims()) {
    throw IndexError("parameter radii must be N x K");
  }
  if (!param_radius.allFinite() || (param_radius.array() < 0.0).any()) {
    throw InfeasibleError("uncertainty radii must be finite and nonnegative");
  }
}

double UncertaintySpec::absolute_radius(int n, const Vector& f_n) const {
  if (mode != UncertaintyMode::kObservation || radius.size() == 0) return 0.0;
  return relative ? radius(n) * f_n.norm() : radius(n);
}

namespace {

constexpr double kFixedPointTol = 1e-10;
constexpr int kFixedPointCap = 200;

// Exact minimizer over the ball for separable utilities convex in f:
// -v_f(f_k + d_k) = 2 lambda d_k, with lambda chosen so that ||d|| = r.
WorstCaseResult multiplier_solve(const std::function<double(int, double)>& dfk, const Vector& f,
                                 double r) {
  const int K = static_cast<int>(f.size());
  Vector g0(K);
  for (int k = 0; k < K; ++k) g0(k) = std::max(0.0, -dfk(k, f(k)));
  WorstCaseResult out;
  out.radius = r;
  out.fallback = true;
  if (g0.norm() == 0.0) {
    out.observation = f;
    out.direction = Vector::Zero(K);
    out.degenerate = true;
    return out;
  }
  const auto step = [&](double lambda) {
    Vector d(K);
    for (int k = 0; k < K; ++k) {
      if (g0(k) == 0.0) {
        d(k) = 0.0;
        continue;
      }
      double lo = 0.0;
      double hi = g0(k) / (2.0 * lambda);
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (-dfk(k, f(k) + mid) - 2.0 * lambda * mid > 0.0) lo = mid; else hi = mid;
      }
      d(k) = 0.5 * (lo + hi);
    }
    return d;
  };
  double lam_hi = g0.norm() / (2.0 * r);
  double lam_lo = lam_hi;
  for (int it = 0; it < 200 && step(lam_lo).norm() < r; ++it) lam_lo *= 0.5;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    if (step(mid).norm() > r) lam_lo = mid; else lam_hi = mid;
  }
  Vector d = step(0.5 * (lam_lo + lam_hi));
  out.residual = std::abs(d.norm() - r);
  d *= r / d.norm();
  out.direction = -d / r;
  out.observation = f + d;
  out.iterations = 100;
  return out;
}

WorstCaseResult fixed_point(const GameInstance& game, int n, const Vector& a_n, const Vector& f,
                            double r) {
  const int K = static_cast<int>(f.size());
  WorstCaseResult out;
  out.radius = r;
  Vector ft = f;
  for (int it = 1; it <= kFixedPointCap; ++it) {
    const Vector g = game.derivatives_at(n, a_n, ft).df;
    const double gn = g.norm();
    if (gn == 0.0) {
      out.observation = f;
      out.direction = Vector::Zero(K);
      out.degenerate = true;
      out.iterations = it;
      return out;
    }
    const Vector theta = g / gn;
    const Vector target = f - r * theta;
    out.residual = (target - ft).norm();
    out.iterations = it;
    if (out.residual <= kFixedPointTol) {
      out.observation = target;
      out.direction = theta;
      return out;
    }
    ft = 0.5 * ft + 0.5 * target;
  }
  auto dfk = [&](int k, double fv) {
    return game.family().evaluate(n, k, a_n(k), fv, game.coupling().x(n, n, k)).df;
  };
  WorstCaseResult fb = multiplier_solve(dfk, f, r);
  fb.iterations += kFixedPointCap;
  return fb;
}

}  // namespace

WorstCaseResult worst_case_at(const GameInstance& game, int n, const Vector& a_n, const Vector& f_n,
                              double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw InfeasibleError("uncertainty radius must be finite and nonnegative");
  }
  if (radius == 0.0) {
    WorstCaseResult out;
    out.observation = f_n;
    out.direction = Vector::Zero(f_n.size());
    const Vector g = game.derivatives_at(n, a_n, f_n).df;
    if (g.norm() > 0.0) out.direction = g / g.norm(); else out.degenerate = true;
    return out;
  }
  try {
    WorstCaseResult out = fixed_point(game, n, a_n, f_n, radius);
    game.value_at(n, a_n, out.observation);
    return out;
  } catch (const DomainError&) {
  }
  // Largest radius whose worst case stays inside the utility domain.
  double lo = 0.0;
  double hi = radius;
  WorstCaseResult best = worst_case_at(game, n, a_n, f_n, 0.0);
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    try {
      WorstCaseResult cand = fixed_point(game, n, a_n, f_n, mid);
      game.value_at(n, a_n, cand.observation);
      best = cand;
      lo = mid;
    } catch (const DomainError&) {
      hi = mid;
    }
  }
  best.clipped = true;
  return best;
}

WorstCaseResult worst_case_observation(const GameInstance& game, const Matrix& a, int n,
                                       const UncertaintySpec& spec) {
  const Vector f = game.observation(a, n);
  const Vector a_n = a.row(n).transpose();
  if (spec.mode == UncertaintyMode::kParameter) {
    WorstCaseResult out;
    out.observation = robust_observation(game, a, n, a_n, spec);
    const Vector d = out.observation - f;
    out.radius = d.norm();
    out.direction = out.radius > 0.0 ? Vector(-d / out.radius) : Vector(Vector::Zero(f.size()));
    out.degenerate = out.radius == 0.0;
    return out;
  }
  return worst_case_at(game, n, a_n, f, spec.absolute_radius(n, f));
}

Vector robust_observation(const GameInstance& game, const Matrix& a, int n, const Vector& a_n,
                          const UncertaintySpec& spec) {
  Vector f = game.observation(a, n);
  if (spec.is_zero()) return f;
  if (spec.mode == UncertaintyMode::kObservation) {
    return worst_case_at(game, n, a_n, f, spec.absolute_radius(n, f)).observation;
  }
  for (int k = 0; k < game.dims(); ++k) {
    double others = 0.0;
    for (int m = 0; m < game.players(); ++m) {
      if (m != n) others += a(m, k) * a(m, k);
    }
    f(k) += game.coupling().x(n, n, k) * spec.param_radius(n, k) * std::sqrt(others);
  }
  return f;
}

double psi(const GameInstance& game, const Matrix& a, int n, const UncertaintySpec& spec) {
  return psi_with(game, a, n, a.row(n).transpose(), spec);
}

double psi_with(const GameInstance& game, const Matrix& a, int n, const Vector& a_n,
                const UncertaintySpec& spec) {
  return game.value_at(n, a_n, robust_observation(game, a, n, a_n, spec));
}

Vector psi_gradient(const GameInstance& game, const Matrix& a, int n, const Vector& a_n,
                    const UncertaintySpec& spec) {
  return game.derivatives_at(n, a_n, robust_observation(game, a, n, a_n, spec)).da;
}

Matrix robust_vi_mapping(const GameInstance& game, const Matrix& a, const UncertaintySpec& spec) {
  Matrix F(game.players(), game.dims());
  for (int n = 0; n < game.players(); ++n) {
    F.row(n) = -psi_gradient(game, a, n, a.row(n).transpose(), spec).transpose();
  }
  return F;
}

namespace {

void require_parameter_mode(const UncertaintySpec& spec) {
  if (!spec.is_zero() && spec.mode != UncertaintyMode::kParameter) {
    throw InfeasibleError("affine robust forms need parameter-level uncertainty");
  }
}

double param_eps(const UncertaintySpec& spec, int n, int k) {
  if (spec.mode != UncertaintyMode::kParameter || spec.param_radius.size() == 0) return 0.0;
  return spec.param_radius(n, k);
}

}  // namespace

Vector robust_affine_base(const AviSystem& avi, const Matrix& a, int n,
                          const UncertaintySpec& spec) {
  require_parameter_mode(spec);
  const int N = static_cast<int>(avi.offsets.rows());
  const int K = static_cast<int>(avi.offsets.cols());
  Vector base(K);
  for (int k = 0; k < K; ++k) {
    double acc = avi.offsets(n, k);
    double others = 0.0;
    for (int m = 0; m < N; ++m) {
      if (m == n) continue;
      acc += avi.ratios[k](n, m) * a(m, k);
      others += a(m, k) * a(m, k);
    }
    base(k) = acc + param_eps(spec, n, k) * std::sqrt(others);
  }
  return base;
}

Matrix robust_avi_mapping(const AviSystem& avi, const Matrix& a, const UncertaintySpec& spec) {
  require_parameter_mode(spec);
  Matrix out = avi_mapping(avi, a);
  if (spec.is_zero()) return out;
  for (int n = 0; n < out.rows(); ++n) {
    for (int k = 0; k < out.cols(); ++k) {
      double others = 0.0;
      for (int m = 0; m < out.rows(); ++m) {
        if (m != n) others += a(m, k) * a(m, k);
      }
      out(n, k) += spec.param_radius(n, k) * std::sqrt(others);
    }
  }
  return out;
}

LevelResponse fill_to_budget(const Vector& base, const StrategySpace& space) {
  const Vector& lo = space.lower();
  const Vector& hi = space.upper();
  const auto at = [&](double level) {
    return Vector((Vector::Constant(base.size(), level) - base).cwiseMax(lo).cwiseMin(hi));
  };
  LevelResponse out;
  const double top = (hi + base).maxCoeff();
  if (space.direction() == SumDirection::kAtLeast || hi.sum() <= space.sum_bound()) {
    out.action = hi;
    out.level = top;
    return out;
  }
  const double S = space.sum_bound();
  double l = (lo + base).minCoeff();
  double h = top;
  for (int it = 0; it < 200 && h - l > 1e-15 * std::max(1.0, std::abs(h)); ++it) {
    const double mid = 0.5 * (l + h);
    if (at(mid).sum() > S) h = mid; else l = mid;
  }
  double level = l;
  // Exact level on the free set identified by bisection.
  double fixed = 0.0;
  double free_base = 0.0;
  int free_count = 0;
  for (int k = 0; k < base.size(); ++k) {
    const double raw = l - base(k);
    if (raw <= lo(k) || raw >= hi(k)) {
      fixed += std::clamp(raw, lo(k), hi(k));
    } else {
      free_base += base(k);
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double exact = (S - fixed + free_base) / free_count;
    if (std::abs(at(exact).sum() - S) <= std::abs(at(level).sum() - S)) level = exact;
  }
  out.action = at(level);
  out.level = level;
  out.budget_binding = true;
  return out;
}

namespace {

void set_multiplier(LevelResponse& r, double theta) {
  r.multiplier = r.level > 0.0 ? std::pow(r.level, theta) : std::nan("");
}

}  // namespace

LevelResponse robust_best_response_log(const AviSystem& avi, const Matrix& a, int n,
                                       const UncertaintySpec& spec, const StrategySpace& space) {
  LevelResponse r = fill_to_budget(robust_affine_base(avi, a, n, spec), space);
  set_multiplier(r, avi.theta);
  return r;
}

LevelResponse proximal_response_log(const AviSystem& avi, const Matrix& b, int n,
                                    const UncertaintySpec& spec, const StrategySpace& space) {
  const Vector r = robust_affine_base(avi, b, n, spec);
  LevelResponse out = fill_to_budget(0.5 * (r - b.row(n).transpose()), space);
  out.level *= 2.0;
  set_multiplier(out, avi.theta);
  return out;
}

}  // namespace racg
