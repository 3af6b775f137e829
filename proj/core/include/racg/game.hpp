#pragma once

#include <string>
#include <vector>

#include "racg/space.hpp"
#include "racg/types.hpp"

namespace racg {

// Coefficients x[k](n, m) of user m's action in user n's observation, plus offsets y(n, k).
class CouplingModel {
 public:
  CouplingModel(std::vector<Matrix> per_dim, Matrix offsets);

  int players() const { return static_cast<int>(offsets_.rows()); }
  int dims() const { return static_cast<int>(offsets_.cols()); }
  double x(int n, int m, int k) const { return per_dim_[k](n, m); }
  double y(int n, int k) const { return offsets_(n, k); }
  const Matrix& dim(int k) const { return per_dim_[k]; }
  const std::vector<Matrix>& per_dim() const { return per_dim_; }
  const Matrix& offsets() const { return offsets_; }

  // Coupling with cross terms (n != m) multiplied by s.
  CouplingModel scaled_cross(double s) const;

 private:
  std::vector<Matrix> per_dim_;
  Matrix offsets_;
};

enum class FamilyTag { kRateLog, kLogTheta, kLinearJackson };

// Value and partial derivatives of one per-dimension utility v(a, f).
struct Partials {
  double value = 0.0;
  double da = 0.0, df = 0.0;
  double daa = 0.0, daf = 0.0, dff = 0.0;
  double daaa = 0.0, daaf = 0.0, daff = 0.0, dfff = 0.0;
};

// Per-dimension partials for one user, each of length K.
struct Derivatives {
  Vector value, da, df, daa, daf, dff, daaa, daaf, daff, dfff;
};

// Closed registry of per-dimension utilities v_n^k(a, f).
//
//   rate-log         log(1 + a / f)             (high-SINR: log a - log f)
//   log-theta        H(s) - H(s0), s0 = (c + f) / x_nn, s = a + s0,
//                    H' = s^theta, or H = log when theta = 1
//   linear-jackson   mu - nu_nn a - f
class UtilityFamily {
 public:
  static UtilityFamily RateLog(bool high_sinr = false);
  static UtilityFamily LogTheta(double theta, Matrix offsets);
  static UtilityFamily LinearJackson(Matrix service_rates, Matrix self_load);

  FamilyTag tag() const { return tag_; }
  bool high_sinr() const { return high_sinr_; }
  double theta() const { return theta_; }
  const Matrix& offsets() const { return params_a_; }
  const Matrix& service_rates() const { return params_a_; }
  const Matrix& self_load() const { return params_b_; }
  std::string name() const;

  // A1 (increasing in own action) does not hold for the Jackson utility.
  bool increasing_waived() const { return tag_ == FamilyTag::kLinearJackson; }

  // Throws DomainError(k) when (a, f) is outside the domain.
  Partials evaluate(int n, int k, double a, double f, double self_coupling) const;
  double value(int n, int k, double a, double f, double self_coupling) const;

 private:
  UtilityFamily() = default;

  FamilyTag tag_ = FamilyTag::kRateLog;
  bool high_sinr_ = false;
  double theta_ = 1.0;
  Matrix params_a_;
  Matrix params_b_;
};

class GameInstance {
 public:
  // Runs finite-difference spot checks of A1/A2 unless check_assumptions is false.
  GameInstance(std::vector<StrategySpace> spaces, CouplingModel coupling, UtilityFamily family,
               bool check_assumptions = true);

  int players() const { return coupling_.players(); }
  int dims() const { return coupling_.dims(); }
  const StrategySpace& space(int n) const { return spaces_.at(n); }
  const std::vector<StrategySpace>& spaces() const { return spaces_; }
  const CouplingModel& coupling() const { return coupling_; }
  const UtilityFamily& family() const { return family_; }

  // f_n^k = sum_{m != n} x_nm^k a_m^k + y_n^k.
  Vector observation(const Matrix& a, int n) const;

  double utility(const Matrix& a, int n) const;
  double social_utility(const Matrix& a) const;
  double value_at(int n, const Vector& a_n, const Vector& f_n) const;
  Derivatives derivatives_at(int n, const Vector& a_n, const Vector& f_n) const;
  Derivatives utility_gradients(const Matrix& a, int n) const;

  bool feasible(const Matrix& a, double tol = kFeasibilityTol) const;
  void require_feasible(const Matrix& a) const;
  // Row-wise projection of the box midpoint.
  Matrix initial_profile() const;

  GameInstance with_coupling(CouplingModel coupling) const;

 private:
  void check_index(int n) const;
  void check_assumptions() const;

  std::vector<StrategySpace> spaces_;
  CouplingModel coupling_;
  UtilityFamily family_;
};

}  // namespace racg
