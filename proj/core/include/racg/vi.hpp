#pragma once

#include <cstdint>
#include <vector>

#include "racg/game.hpp"

namespace racg {

// Row n is -grad_{a_n} v_n(a).
Matrix vi_mapping(const GameInstance& game, const Matrix& a);

struct ViReport {
  Matrix upsilon;     // diag alpha_min, off-diagonal -beta_max
  Vector alpha_min;
  Matrix beta_max;    // zero diagonal
  bool p_matrix = false;
  double c_sm = 0.0;  // 0 means not strongly monotone
  bool closed_form = false;
  int samples = 0;    // profiles visited when sampling
};

// Closed forms for rate-log and linear-jackson, sampling otherwise.
ViReport build_upsilon(const GameInstance& game, std::uint64_t seed = 0);
// Box corners (all of them when N*K <= 12) plus random_samples feasible points.
ViReport upsilon_by_sampling(const GameInstance& game, std::uint64_t seed = 0,
                             int random_samples = 1000);

// All principal minors > 1e-12. Throws for more than 16 rows.
bool is_p_matrix(const Matrix& m);
// lambda_min of (U + U^T) / 2, clamped at 0.
double strong_monotonicity_constant(const Matrix& upsilon);

// ||delta||_2 / c_sm; throws BoundUnavailable when c_sm <= 0.
double theorem2_distance_bound(const Vector& delta, double c_sm);

// Per-user radius bound: eps_n itself, or eps_n * sup ||f_n||_2 in relative mode.
Vector observation_delta(const GameInstance& game, const Vector& eps, bool relative);

// W[k](n, n) = dv_n/da_n^k, W[k](n, m) = (dv_n/df_n^k) x_nm^k.
std::vector<Matrix> w_matrix(const GameInstance& game, const Matrix& a);
// max_k spectral norm of W[k].
double w_norm(const std::vector<Matrix>& w);
double utility_gap_estimate(const GameInstance& game, const Matrix& a_star, const Vector& delta,
                            double c_sm);

struct AviSystem {
  double theta = 1.0;
  Matrix offsets;              // w(n, k) = (y + c) / x_nn
  std::vector<Matrix> ratios;  // ratios[k](n, m) = x_nm^k / x_nn^k, unit diagonal
  Matrix m_max;                // max_k ratio off the diagonal, zero diagonal
  Matrix monotonicity;         // I - m_max
  double lambda_min = 0.0;     // lambda_min of the symmetric part of monotonicity
};

AviSystem build_avi(const GameInstance& game);
// M(a): row n is w_n + sum_m M_nm a_m (including the identity block for m = n).
Matrix avi_mapping(const AviSystem& avi, const Matrix& a);

// Per-user norms at the reachable upper corner.
Vector corner_norms(const std::vector<StrategySpace>& spaces);
// Every user: p_n > sum_{m != n} m_max(n, m) p_m (equality fails).
bool avi_uniqueness_check(const AviSystem& avi, const std::vector<StrategySpace>& spaces);
// Every user: p_n < sum_{m != n} m_max(n, m) p_m.
bool avi_reversed_condition(const AviSystem& avi, const std::vector<StrategySpace>& spaces);

// ||E||_2^2 / lambda_min(sym(aggregate)), E = diag(max_k eps(n, k)).
double theorem3_distance_bound(const Matrix& eps, const Matrix& aggregate);

}  // namespace racg
