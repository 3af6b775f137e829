#pragma once

#include "racg/game.hpp"
#include "racg/vi.hpp"

namespace racg {

enum class UncertaintyMode { kObservation, kParameter };

struct UncertaintySpec {
  UncertaintyMode mode = UncertaintyMode::kObservation;
  Vector radius;        // observation mode, one per user
  Matrix param_radius;  // parameter mode, N x K
  bool relative = false;

  static UncertaintySpec None(int players);
  static UncertaintySpec Observation(Vector eps, bool relative = false);
  static UncertaintySpec Uniform(int players, double eps, bool relative = false);
  static UncertaintySpec Parameter(Matrix eps);

  bool is_zero() const;
  // Throws when radii are negative/non-finite or the mode does not suit the game.
  void validate(const GameInstance& game) const;
  // Absolute ball radius for user n whose nominal observation is f_n.
  double absolute_radius(int n, const Vector& f_n) const;
};

struct WorstCaseResult {
  Vector observation;  // f~*
  Vector direction;    // unit vector theta with f~* = f - r theta
  double radius = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool degenerate = false;  // flat utility in f, f~* = f
  bool clipped = false;     // radius shrunk to stay inside the utility domain
  bool fallback = false;    // fixed point hit its cap, exact multiplier solve used
};

// Minimizer of u_n(a_n, .) over the ball of the given absolute radius around f_n.
WorstCaseResult worst_case_at(const GameInstance& game, int n, const Vector& a_n,
                              const Vector& f_n, double radius);
WorstCaseResult worst_case_observation(const GameInstance& game, const Matrix& a, int n,
                                       const UncertaintySpec& spec);

// Worst-case observation for given own action and others' profile (rows of a other than n).
Vector robust_observation(const GameInstance& game, const Matrix& a, int n, const Vector& a_n,
                          const UncertaintySpec& spec);

double psi(const GameInstance& game, const Matrix& a, int n, const UncertaintySpec& spec);
// Psi_n with own action replaced by a_n.
double psi_with(const GameInstance& game, const Matrix& a, int n, const Vector& a_n,
                const UncertaintySpec& spec);
// Gradient of Psi_n in a_n (derivative of u at the minimizer).
Vector psi_gradient(const GameInstance& game, const Matrix& a, int n, const Vector& a_n,
                    const UncertaintySpec& spec);
// Robust VI mapping, row n = -grad Psi_n.
Matrix robust_vi_mapping(const GameInstance& game, const Matrix& a, const UncertaintySpec& spec);

// Nominal AVI mapping plus (eps_n^k ||a_{-n}^k||_2)_k.
Matrix robust_avi_mapping(const AviSystem& avi, const Matrix& a, const UncertaintySpec& spec);

struct LevelResponse {
  Vector action;
  double level = 0.0;       // lambda^(1/theta)
  double multiplier = 0.0;  // lambda
  bool budget_binding = false;
};

// a_k = clip(level - base_k, lo, hi) with the level chosen so the budget binds,
// or the upper box corner when the whole box fits inside the budget.
LevelResponse fill_to_budget(const Vector& base, const StrategySpace& space);

// Closed-form robust best response of user n (parameter-mode or zero spec).
LevelResponse robust_best_response_log(const AviSystem& avi, const Matrix& a, int n,
                                       const UncertaintySpec& spec, const StrategySpace& space);

// Closed-form proximal response for the affine map: a_k = clip((L - r_k + b_k) / 2).
LevelResponse proximal_response_log(const AviSystem& avi, const Matrix& b, int n,
                                    const UncertaintySpec& spec, const StrategySpace& space);

// w_n + sum_{m != n} M_nm a_m + eps_n ||a_{-n}|| for each dimension.
Vector robust_affine_base(const AviSystem& avi, const Matrix& a, int n,
                          const UncertaintySpec& spec);

}  // namespace racg
