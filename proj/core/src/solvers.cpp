#include "racg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace racg {

namespace {

bool closed_form_applies(const GameInstance& game, const UncertaintySpec& spec) {
  return game.family().tag() == FamilyTag::kLogTheta &&
         (spec.is_zero() || spec.mode == UncertaintyMode::kParameter);
}

// The linear utility has a constant observation slope, so the worst case does not depend on the
// own action and Psi_n has gradient -nu_nn.
Vector linear_proximal(const GameInstance& game, const Matrix& b, int n) {
  const Vector bn = b.row(n).transpose();
  return game.space(n).project(bn - game.family().self_load().row(n).transpose());
}

// Psi_n(x, b_{-n}) - rho/2 ||x - b_n||^2 with its gradient and a curvature scaling.
ConcaveObjective regularized_psi(const GameInstance& game, const UncertaintySpec& spec,
                                 const Matrix& b, int n, double rho) {
  const Vector anchor = b.row(n).transpose();
  return [&game, &spec, &b, n, rho, anchor](const Vector& x, Vector* grad, Vector* scale) {
    const Vector ft = robust_observation(game, b, n, x, spec);
    const double prox = 0.5 * rho * (x - anchor).squaredNorm();
    if (grad == nullptr) return game.value_at(n, x, ft) - prox;
    const Derivatives d = game.derivatives_at(n, x, ft);
    *grad = d.da - rho * (x - anchor);
    if (scale != nullptr) {
      *scale = (-d.daa).cwiseMax(0.0).array() + (rho > 0.0 ? rho : 1e-6);
    }
    return d.value.sum() - prox;
  };
}

Vector user_utilities(const GameInstance& game, const UncertaintySpec& spec, const Matrix& a) {
  Vector u(game.players());
  for (int n = 0; n < game.players(); ++n) u(n) = psi(game, a, n, spec);
  return u;
}

using UserStep = std::function<Vector(const Matrix& view, int n)>;

RunTrace iterate(const GameInstance& game, const UncertaintySpec& spec, const SolverConfig& config,
                 const Matrix& a0, const UserStep& step) {
  if (config.max_iterations < 1) throw InfeasibleError("max_iterations must be at least 1");
  if (!(config.tolerance > 0.0)) throw InfeasibleError("tolerance must be positive");
  game.require_feasible(a0);
  RunTrace tr;
  tr.profiles.push_back(a0);
  const bool every_utility = config.record_history && config.record_utilities;
  if (every_utility) tr.utilities.push_back(user_utilities(game, spec, a0));
  Matrix prev = a0;
  for (int t = 1; t <= config.max_iterations; ++t) {
    Matrix next = prev;
    for (int n = 0; n < game.players(); ++n) {
      const Matrix& view = config.scheme == UpdateScheme::kSimultaneous ? prev : next;
      next.row(n) = step(view, n).transpose();
    }
    const double s = (next - prev).norm();
    tr.step_norms.push_back(s);
    tr.iterations = t;
    if (config.record_history) tr.profiles.push_back(next);
    if (every_utility) tr.utilities.push_back(user_utilities(game, spec, next));
    prev = std::move(next);
    if (s <= config.tolerance) {
      tr.converged = true;
      break;
    }
  }
  if (!config.record_history) tr.profiles.push_back(prev);
  if (!every_utility) tr.utilities.push_back(user_utilities(game, spec, prev));
  return tr;
}

}  // namespace

InnerResult proximal_step_generic(const GameInstance& game, const UncertaintySpec& spec,
                                  const Matrix& b, int n, const SolverConfig& config) {
  const ConcaveObjective obj = regularized_psi(game, spec, b, n, 1.0);
  return maximize_concave(game.space(n), obj, b.row(n).transpose(), config.inner_tolerance,
                          config.inner_max_iterations);
}

Vector proximal_step(const GameInstance& game, const UncertaintySpec& spec, const Matrix& b, int n,
                     const SolverConfig& config) {
  if (closed_form_applies(game, spec)) {
    return proximal_response_log(build_avi(game), b, n, spec, game.space(n)).action;
  }
  if (game.family().tag() == FamilyTag::kLinearJackson) return linear_proximal(game, b, n);
  return proximal_step_generic(game, spec, b, n, config).x;
}

Vector minimize_linear(const Vector& c, const StrategySpace& space) {
  const Vector& lo = space.lower();
  const Vector& hi = space.upper();
  const int K = space.dims();
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return c(i) < c(j); });
  Vector x = lo;
  double room = space.sum_bound() - x.sum();
  if (space.direction() == SumDirection::kAtMost) {
    for (int k : order) {
      if (c(k) >= 0.0 || room <= 0.0) break;
      const double add = std::min(hi(k) - lo(k), room);
      x(k) += add;
      room -= add;
    }
    return x;
  }
  // Lower-sum: negative costs go to their upper bounds, then fill the deficit cheapest first.
  for (int k = 0; k < K; ++k) {
    if (c(k) < 0.0) x(k) = hi(k);
  }
  double deficit = space.sum_bound() - x.sum();
  for (int k : order) {
    if (deficit <= 0.0) break;
    if (c(k) < 0.0) continue;
    const double add = std::min(hi(k) - x(k), deficit);
    x(k) += add;
    deficit -= add;
  }
  return x;
}

Vector best_response(const GameInstance& game, const UncertaintySpec& spec, const Matrix& a, int n,
                     const SolverConfig& config) {
  switch (game.family().tag()) {
    case FamilyTag::kLinearJackson:
      return minimize_linear(game.family().self_load().row(n).transpose(), game.space(n));
    case FamilyTag::kLogTheta:
      if (closed_form_applies(game, spec)) {
        return robust_best_response_log(build_avi(game), a, n, spec, game.space(n)).action;
      }
      break;
    case FamilyTag::kRateLog:
      break;
  }
  const ConcaveObjective obj = regularized_psi(game, spec, a, n, 0.0);
  return maximize_concave(game.space(n), obj, a.row(n).transpose(), config.inner_tolerance,
                          config.inner_max_iterations)
      .x;
}

Preconditions evaluate_preconditions(const GameInstance& game, const Matrix& a0) {
  Preconditions p;
  p.p_matrix = game.players() <= 16 && build_upsilon(game).p_matrix;
  p.third_partials_vanish = true;
  for (const Matrix& a : {a0, game.initial_profile()}) {
    for (int n = 0; n < game.players(); ++n) {
      const Derivatives d = game.utility_gradients(a, n);
      if (d.daaf.cwiseAbs().maxCoeff() > 1e-12 || d.daff.cwiseAbs().maxCoeff() > 1e-12) {
        p.third_partials_vanish = false;
      }
    }
  }
  return p;
}

RunTrace run_distributed(const GameInstance& game, const UncertaintySpec& spec,
                         const SolverConfig& config, const Matrix& a0) {
  spec.validate(game);
  game.require_feasible(a0);
  const Preconditions pre = evaluate_preconditions(game, a0);
  RunTrace tr;
  if (closed_form_applies(game, spec)) {
    const AviSystem avi = build_avi(game);
    tr = iterate(game, spec, config, a0, [&](const Matrix& b, int n) {
      return proximal_response_log(avi, b, n, spec, game.space(n)).action;
    });
  } else if (game.family().tag() == FamilyTag::kLinearJackson) {
    tr = iterate(game, spec, config, a0,
                 [&](const Matrix& b, int n) { return linear_proximal(game, b, n); });
  } else {
    int failures = 0;
    tr = iterate(game, spec, config, a0, [&](const Matrix& b, int n) {
      InnerResult r = proximal_step_generic(game, spec, b, n, config);
      if (!r.converged) ++failures;
      return r.x;
    });
    tr.inner_failures = failures;
  }
  tr.preconditions = pre;
  return tr;
}

RunTrace best_response_sweep(const GameInstance& game, const UncertaintySpec& spec,
                             const SolverConfig& config, const Matrix& a0) {
  spec.validate(game);
  const AviSystem avi = build_avi(game);
  return iterate(game, spec, config, a0, [&](const Matrix& b, int n) {
    return robust_best_response_log(avi, b, n, spec, game.space(n)).action;
  });
}

double default_gradient_step(const GameInstance& game, const Matrix& a0) {
  double curvature = 0.0;
  for (int n = 0; n < game.players(); ++n) {
    const Derivatives d = game.utility_gradients(a0, n);
    for (int k = 0; k < game.dims(); ++k) {
      double c = std::abs(d.daa(k));
      for (int m = 0; m < game.players(); ++m) {
        if (m != n) c += std::abs(d.daf(k) * game.coupling().x(n, m, k));
      }
      curvature = std::max(curvature, c);
    }
  }
  return 0.1 / (1.0 + curvature);
}

RunTrace gradient_play(const GameInstance& game, const SolverConfig& config, const Matrix& a0,
                       const UncertaintySpec* spec_in) {
  const UncertaintySpec spec = spec_in ? *spec_in : UncertaintySpec::None(game.players());
  spec.validate(game);
  const double s = config.step_size ? *config.step_size : default_gradient_step(game, a0);
  return iterate(game, spec, config, a0, [&](const Matrix& b, int n) {
    const Vector bn = b.row(n).transpose();
    if (s == 0.0) return bn;
    return game.space(n).project(bn + s * psi_gradient(game, b, n, bn, spec));
  });
}

RunTrace jacobi_update(const GameInstance& game, const SolverConfig& config, const Matrix& a0,
                       const UncertaintySpec* spec_in) {
  const UncertaintySpec spec = spec_in ? *spec_in : UncertaintySpec::None(game.players());
  spec.validate(game);
  return iterate(game, spec, config, a0, [&](const Matrix& b, int n) {
    return Vector(0.5 * b.row(n).transpose() + 0.5 * best_response(game, spec, b, n, config));
  });
}

bool multiple_equilibria_suspected(const ViReport& report) {
  for (int n = 0; n < report.alpha_min.size(); ++n) {
    if (report.alpha_min(n) < report.beta_max.row(n).sum()) return true;
  }
  return false;
}

double OpportunisticResult::eta() const {
  if (nominal_social == 0.0) return 0.0;
  return (best_social - nominal_social) / std::abs(nominal_social);
}

OpportunisticResult opportunistic_run(const GameInstance& game, const OpportunisticConfig& config) {
  return opportunistic_run(game, config, game.initial_profile());
}

OpportunisticResult opportunistic_run(const GameInstance& game, const OpportunisticConfig& config,
                                      const Matrix& a0) {
  if (!(config.chi > 0.0 && config.chi < 1.0)) throw InfeasibleError("chi must lie in (0, 1)");
  if (!(config.delta > 0.0)) throw InfeasibleError("delta must be positive");
  const int N = game.players();
  OpportunisticResult out;
  out.stage1 = run_distributed(game, UncertaintySpec::None(N), config.stage_config, a0);
  out.best_profile = out.stage1.final_profile();
  out.nominal_social = game.social_utility(out.best_profile);
  out.best_social = out.nominal_social;
  out.triggered = multiple_equilibria_suspected(build_upsilon(game));
  if (!out.triggered) return out;

  Matrix current = out.best_profile;
  for (int t1 = 1; t1 <= config.max_expansions; ++t1) {
    const double eps = t1 * config.chi;
    const UncertaintySpec spec = UncertaintySpec::Uniform(N, eps, config.relative);
    const RunTrace stage = run_distributed(game, spec, config.stage_config, current);
    current = stage.final_profile();
    const double social = game.social_utility(current);
    ++out.expansions;
    out.eps_history.push_back(eps);
    out.social_history.push_back(social);
    if (!(social > out.best_social + config.delta)) break;
    out.best_social = social;
    out.best_profile = current;
    out.final_eps = eps;
  }
  return out;
}

PerturbedRun run_perturbed(const GameInstance& game, const UncertaintySpec& spec, Dynamics dynamics,
                           const SolverConfig& config, const Matrix& a0,
                           const Perturbation& perturbation) {
  spec.validate(game);
  game.require_feasible(a0);
  const int N = game.players();
  const int K = game.dims();
  const double s = config.step_size ? *config.step_size : default_gradient_step(game, a0);
  std::optional<AviSystem> avi;
  if (closed_form_applies(game, spec)) avi = build_avi(game);

  const auto step = [&](const Matrix& view, int n) -> Vector {
    const Vector bn = view.row(n).transpose();
    switch (dynamics) {
      case Dynamics::kProximal:
        if (avi) return proximal_response_log(*avi, view, n, spec, game.space(n)).action;
        if (game.family().tag() == FamilyTag::kLinearJackson) return linear_proximal(game, view, n);
        return proximal_step_generic(game, spec, view, n, config).x;
      case Dynamics::kBestResponse:
        return best_response(game, spec, view, n, config);
      case Dynamics::kGradientPlay:
        return game.space(n).project(bn + s * psi_gradient(game, view, n, bn, spec));
      case Dynamics::kJacobi:
        return game.space(n).project(0.5 * bn + 0.5 * best_response(game, spec, view, n, config));
    }
    return bn;
  };

  std::mt19937_64 rng(perturbation.seed);
  std::uniform_real_distribution<double> xi(-1.0, 1.0);
  PerturbedRun out;
  Matrix planned = a0;
  Matrix realized = a0;
  out.planned.profiles.push_back(a0);
  out.realized.push_back(a0);
  for (int t = 1; t <= config.max_iterations; ++t) {
    Matrix next(N, K);
    for (int n = 0; n < N; ++n) {
      const Matrix* view = &realized;
      if (spec.mode == UncertaintyMode::kObservation && !spec.is_zero()) {
        const Vector f_plan = game.observation(planned, n);
        const Vector f_real = game.observation(realized, n);
        if ((f_real - f_plan).norm() <= spec.absolute_radius(n, f_plan) + 1e-12) view = &planned;
      }
      next.row(n) = step(*view, n).transpose();
    }
    Matrix noisy(N, K);
    for (int n = 0; n < N; ++n) {
      Vector r(K);
      // execution noise is not projected back onto the strategy set
      for (int k = 0; k < K; ++k) {
        r(k) = std::max(0.0, next(n, k) * (1.0 + perturbation.eps * xi(rng)));
      }
      noisy.row(n) = r.transpose();
    }
    const double sn = (next - planned).norm();
    out.planned.step_norms.push_back(sn);
    out.planned.iterations = t;
    if (config.record_history) out.planned.profiles.push_back(next);
    out.realized.push_back(noisy);
    planned = std::move(next);
    realized = std::move(noisy);
  }
  if (!config.record_history) out.planned.profiles.push_back(planned);
  out.planned.converged = !out.planned.step_norms.empty() &&
                          out.planned.step_norms.back() <= config.tolerance;
  out.planned.utilities.push_back(user_utilities(game, spec, planned));
  return out;
}

}  // namespace racg
