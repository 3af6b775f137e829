#pragma once

#include "racg/types.hpp"

namespace racg {

enum class SumDirection { kAtMost, kAtLeast };

// Box [lower, upper] intersected with a half-space on the coordinate sum.
class StrategySpace {
 public:
  StrategySpace(Vector lower, Vector upper, double sum_bound,
                SumDirection direction = SumDirection::kAtMost);

  // Box [0, per_dim_max]^K with sum <= total.
  static StrategySpace Budget(int dims, double per_dim_max, double total);

  int dims() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  double sum_bound() const { return sum_bound_; }
  SumDirection direction() const { return direction_; }

  bool contains(const Vector& a, double tol = kFeasibilityTol) const;

  // Euclidean projection.
  Vector project(const Vector& v) const;
  // Projection in the metric sum_k w_k (x_k - v_k)^2, w > 0.
  Vector project(const Vector& v, const Vector& weights) const;

  // Largest value each coordinate can take on the feasible set.
  Vector reachable_upper() const;
  // Smallest value each coordinate can take on the feasible set.
  Vector reachable_lower() const;

 private:
  Vector lower_;
  Vector upper_;
  double sum_bound_;
  SumDirection direction_;
};

inline Vector project_feasible(const StrategySpace& space, const Vector& v) {
  return space.project(v);
}

}  // namespace racg
