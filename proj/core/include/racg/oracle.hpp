#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "racg/robust.hpp"

namespace racg {

struct GridSpec {
  int points = 21;                  // per dimension, G >= 3
  std::optional<double> tolerance;  // tau_NE; default 2 * spacing * max gradient norm
  std::int64_t max_joint = 10'000'000;
};

// Feasible points of a regular grid over the box of one strategy space.
struct PlayerGrid {
  std::vector<Vector> points;
  std::vector<std::vector<int>> coords;  // integer grid coordinates of each point
  double spacing = 0.0;                  // largest per-axis spacing
};

PlayerGrid player_grid(const StrategySpace& space, int points);

struct OracleResult {
  std::vector<Matrix> equilibria;                 // ascending joint index order
  std::vector<std::vector<int>> joint_index;      // per-player point ids of each equilibrium
  std::vector<double> regret;                     // max unilateral gain at each equilibrium
  std::vector<int> cell;                          // cell id of each equilibrium, -1 off-cell
  double tolerance = 0.0;
  double spacing = 0.0;
  double max_gradient = 0.0;
  int clusters = 0;  // equilibrium cells: connected regret basins inside the tolerance set
  std::int64_t joint_points = 0;
};

OracleResult brute_force_ne(const GameInstance& game, const GridSpec& grid = {});
OracleResult brute_force_rne(const GameInstance& game, const UncertaintySpec& spec,
                             const GridSpec& grid = {});

// Some equilibrium cell lies within one grid spacing (infinity norm) of a.
bool oracle_contains(const OracleResult& result, const Matrix& a);
// Smallest infinity-norm distance from a to a cell point (inf when none).
double oracle_distance(const OracleResult& result, const Matrix& a);

struct BoundaryMinimum {
  double value = 0.0;
  Vector observation;
  int evaluations = 0;
};

// Minimum of u_n(a_n, .) over the sphere of the given radius around f_n by direct search:
// two points for K = 1, an angle grid for K = 2, a refined latitude-longitude grid for K = 3,
// random directions with refinement beyond that.
BoundaryMinimum worst_case_grid(const GameInstance& game, int n, const Vector& a_n,
                                const Vector& f_n, double radius, int resolution = 3600,
                                std::uint64_t seed = 0);

// Both saddle equalities on grids: a_n maximizes u_n(., f_tilde) over the own grid and f_tilde
// minimizes u_n(a_n, .) over the sphere, each within tolerance.
bool saddle_check(const GameInstance& game, const UncertaintySpec& spec, const Matrix& a, int n,
                  const Vector& f_tilde, double tolerance, int grid_points = 21);

// Central-difference gradients of a scalar function.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double step = 1e-6);

}  // namespace racg
