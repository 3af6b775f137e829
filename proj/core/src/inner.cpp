#include <cmath>

#include "racg/solvers.hpp"

namespace racg {

InnerResult maximize_concave(const StrategySpace& space, const ConcaveObjective& objective,
                             const Vector& x0, double tolerance, int max_iterations) {
  InnerResult out;
  Vector x = space.project(x0);
  Vector g;
  Vector d;
  double fx = objective(x, &g, &d);
  for (int it = 0; it < max_iterations; ++it) {
    out.residual = (x - space.project(x + g)).norm();
    out.iterations = it;
    if (out.residual <= tolerance) {
      out.converged = true;
      break;
    }
    const Vector w = d.cwiseMax(1e-12);
    const Vector dir = g.cwiseQuotient(w);
    double t = 1.0;
    bool accepted = false;
    Vector y;
    Vector gy;
    Vector dy;
    double fy = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      y = space.project(x + t * dir, w);
      fy = objective(y, &gy, &dy);
      const double gain = g.dot(y - x);
      if (fy >= fx + 0.5 * gain - 1e-15 * (1.0 + std::abs(fx))) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || (y - x).norm() == 0.0) break;
    x = std::move(y);
    g = std::move(gy);
    d = std::move(dy);
    fx = fy;
  }
  if (!out.converged) {
    out.residual = (x - space.project(x + g)).norm();
    out.converged = out.residual <= tolerance;
  }
  out.x = x;
  out.value = fx;
  return out;
}

}  // namespace racg
