#include "racg/space.hpp"

#include <algorithm>
#include <cmath>

namespace racg {

namespace {

Vector clip(const Vector& v, const Vector& lo, const Vector& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

StrategySpace::StrategySpace(Vector lower, Vector upper, double sum_bound, SumDirection direction)
    : lower_(std::move(lower)), upper_(std::move(upper)), sum_bound_(sum_bound), direction_(direction) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) {
    throw InfeasibleError("strategy space bounds must be nonempty and of equal length");
  }
  if (!lower_.allFinite() || !upper_.allFinite() || !std::isfinite(sum_bound_)) {
    throw InfeasibleError("strategy space bounds must be finite");
  }
  for (int k = 0; k < dims(); ++k) {
    if (lower_(k) > upper_(k)) {
      throw InfeasibleError("lower bound exceeds upper bound in dimension " + std::to_string(k));
    }
  }
  if (direction_ == SumDirection::kAtMost && lower_.sum() > sum_bound_ + kFeasibilityTol) {
    throw InfeasibleError("sum of lower bounds exceeds the sum budget");
  }
  if (direction_ == SumDirection::kAtLeast && upper_.sum() < sum_bound_ - kFeasibilityTol) {
    throw InfeasibleError("sum of upper bounds is below the minimum sum");
  }
}

StrategySpace StrategySpace::Budget(int dims, double per_dim_max, double total) {
  return StrategySpace(Vector::Zero(dims), Vector::Constant(dims, per_dim_max), total);
}

bool StrategySpace::contains(const Vector& a, double tol) const {
  if (a.size() != lower_.size()) return false;
  for (int k = 0; k < dims(); ++k) {
    if (!std::isfinite(a(k)) || a(k) < lower_(k) - tol || a(k) > upper_(k) + tol) return false;
  }
  const double s = a.sum();
  return direction_ == SumDirection::kAtMost ? s <= sum_bound_ + tol : s >= sum_bound_ - tol;
}

Vector StrategySpace::project(const Vector& v) const {
  return project(v, Vector::Ones(dims()));
}

Vector StrategySpace::project(const Vector& v, const Vector& weights) const {
  if (v.size() != lower_.size() || weights.size() != lower_.size()) {
    throw InfeasibleError("projection input has wrong dimension");
  }
  Vector x = clip(v, lower_, upper_);
  const double sign = direction_ == SumDirection::kAtMost ? -1.0 : 1.0;
  const auto violated = [&](double s) {
    return direction_ == SumDirection::kAtMost ? s > sum_bound_ : s < sum_bound_;
  };
  if (!violated(x.sum())) return x;

  // x(mu) = clip(v + sign * mu / w); the sum moves monotonically toward the bound as mu grows.
  const Vector inv_w = weights.cwiseInverse();
  const auto at = [&](double mu) { return clip(v + sign * mu * inv_w, lower_, upper_); };
  double lo = 0.0;
  double hi = 0.0;
  for (int k = 0; k < dims(); ++k) {
    const double gap = direction_ == SumDirection::kAtMost ? v(k) - lower_(k) : upper_(k) - v(k);
    hi = std::max(hi, weights(k) * gap);
  }
  hi = hi * (1.0 + 1e-12) + 1e-300;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (violated(at(mid).sum())) lo = mid; else hi = mid;
  }

  // Solve the multiplier exactly on the active set found by bisection.
  Vector y = at(hi);
  double fixed = 0.0;
  double free_v = 0.0;
  double free_iw = 0.0;
  for (int k = 0; k < dims(); ++k) {
    const double raw = v(k) + sign * hi * inv_w(k);
    if (raw <= lower_(k) || raw >= upper_(k)) {
      fixed += y(k);
    } else {
      free_v += v(k);
      free_iw += inv_w(k);
    }
  }
  if (free_iw > 0.0) {
    const double mu = sign * (sum_bound_ - fixed - free_v) / free_iw;
    if (mu >= 0.0) {
      Vector z = at(mu);
      if (std::abs(z.sum() - sum_bound_) <= std::abs(y.sum() - sum_bound_)) y = z;
    }
  }
  return y;
}

Vector StrategySpace::reachable_upper() const {
  if (direction_ == SumDirection::kAtLeast) return upper_;
  Vector r(dims());
  const double lo_sum = lower_.sum();
  for (int k = 0; k < dims(); ++k) r(k) = std::min(upper_(k), sum_bound_ - (lo_sum - lower_(k)));
  return r;
}

Vector StrategySpace::reachable_lower() const {
  if (direction_ == SumDirection::kAtMost) return lower_;
  Vector r(dims());
  const double hi_sum = upper_.sum();
  for (int k = 0; k < dims(); ++k) r(k) = std::max(lower_(k), sum_bound_ - (hi_sum - upper_(k)));
  return r;
}

}  // namespace racg
