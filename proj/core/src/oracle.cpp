#include "racg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

namespace racg {

PlayerGrid player_grid(const StrategySpace& space, int points) {
  if (points < 3) throw InfeasibleError("grid needs at least 3 points per dimension");
  const int K = space.dims();
  PlayerGrid g;
  Vector step(K);
  for (int k = 0; k < K; ++k) step(k) = (space.upper()(k) - space.lower()(k)) / (points - 1);
  g.spacing = step.maxCoeff();
  std::vector<int> c(K, 0);
  while (true) {
    Vector p(K);
    for (int k = 0; k < K; ++k) {
      p(k) = c[k] == points - 1 ? space.upper()(k) : space.lower()(k) + c[k] * step(k);
    }
    if (space.contains(p)) {
      g.points.push_back(p);
      g.coords.push_back(c);
    }
    int k = K - 1;
    while (k >= 0 && ++c[k] == points) c[k--] = 0;
    if (k < 0) break;
  }
  return g;
}

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Calls fn(j) for every feasible joint index in the 3^{NK} neighbourhood of ids (ids included).
class Neighbourhood {
 public:
  Neighbourhood(const std::vector<PlayerGrid>& grids, const std::vector<std::int64_t>& strides)
      : grids_(grids), strides_(strides), lookup_(grids.size()) {
    for (std::size_t n = 0; n < grids.size(); ++n) {
      for (int i = 0; i < static_cast<int>(grids[n].coords.size()); ++i) {
        lookup_[n][grids[n].coords[i]] = i;
      }
    }
    const int dims = static_cast<int>(grids.size() * grids[0].coords[0].size());
    offsets_ = 1;
    for (int d = 0; d < dims; ++d) offsets_ *= 3;
  }

  template <class Fn>
  void visit(const std::vector<int>& ids, Fn&& fn) const {
    const int N = static_cast<int>(grids_.size());
    const int K = static_cast<int>(grids_[0].coords[0].size());
    for (std::int64_t o = 0; o < offsets_; ++o) {
      std::int64_t rest = o;
      std::int64_t j = 0;
      bool ok = true;
      for (int n = 0; n < N && ok; ++n) {
        std::vector<int> c = grids_[n].coords[ids[n]];
        for (int k = 0; k < K; ++k) {
          c[k] += static_cast<int>(rest % 3) - 1;
          rest /= 3;
        }
        const auto it = lookup_[n].find(c);
        if (it == lookup_[n].end()) {
          ok = false;
        } else {
          j += it->second * strides_[n];
        }
      }
      if (ok) fn(j);
    }
  }

 private:
  const std::vector<PlayerGrid>& grids_;
  const std::vector<std::int64_t>& strides_;
  std::vector<std::map<std::vector<int>, int>> lookup_;
  std::int64_t offsets_ = 1;
};

std::vector<int> split_index(std::int64_t j, const std::vector<std::int64_t>& strides) {
  std::vector<int> ids(strides.size());
  for (std::size_t n = 0; n < strides.size(); ++n) {
    ids[n] = static_cast<int>(j / strides[n]);
    j %= strides[n];
  }
  return ids;
}

// Cells are connected groups of tolerance-passing grid points where the regret is a local
// minimum over the neighbourhood. Under a loose tolerance the whole near-equilibrium region is
// connected, while distinct equilibria still sit in separate regret basins.
// Returns the cell id of every tolerance-passing point, -1 for points outside every cell.
std::vector<int> assign_cells(const std::vector<float>& regret, const std::vector<std::vector<int>>& ne,
                              const std::vector<std::int64_t>& strides, const Neighbourhood& hood,
                              int& cells) {
  const int S = static_cast<int>(ne.size());
  std::unordered_map<std::int64_t, int> where;
  std::vector<std::int64_t> joint(S);
  for (int s = 0; s < S; ++s) {
    std::int64_t j = 0;
    for (std::size_t n = 0; n < strides.size(); ++n) j += ne[s][n] * strides[n];
    joint[s] = j;
  }
  for (int s = 0; s < S; ++s) {
    bool minimum = true;
    hood.visit(ne[s], [&](std::int64_t j) { minimum = minimum && regret[joint[s]] <= regret[j]; });
    if (minimum) where[joint[s]] = s;
  }
  DisjointSet ds(S);
  for (const auto& [j, s] : where) {
    hood.visit(ne[s], [&](std::int64_t q) {
      const auto hit = where.find(q);
      if (hit != where.end()) ds.unite(s, hit->second);
    });
  }
  std::vector<int> cell(S, -1);
  std::map<int, int> ids;  // ordered by representative so numbering is deterministic
  for (const auto& [j, s] : where) ids.emplace(ds.find(s), 0);
  int next = 0;
  for (auto& [root, id] : ids) id = next++;
  for (const auto& [j, s] : where) cell[s] = ids[ds.find(s)];
  cells = next;
  return cell;
}

}  // namespace

namespace {

OracleResult enumerate(const GameInstance& game, const UncertaintySpec& spec, const GridSpec& spec_grid) {
  spec.validate(game);
  const int N = game.players();
  const int K = game.dims();
  std::vector<PlayerGrid> grids;
  std::int64_t total = 1;
  double spacing = 0.0;
  for (int n = 0; n < N; ++n) {
    grids.push_back(player_grid(game.space(n), spec_grid.points));
    if (grids.back().points.empty()) throw InfeasibleError("strategy grid has no feasible point");
    spacing = std::max(spacing, grids.back().spacing);
    total *= static_cast<std::int64_t>(grids.back().points.size());
    if (total > spec_grid.max_joint) {
      throw InfeasibleError("joint grid exceeds the cap of " + std::to_string(spec_grid.max_joint));
    }
  }
  // Player 0 is the most significant digit, so ascending joint order is lexicographic.
  std::vector<std::int64_t> strides(N);
  std::int64_t s = 1;
  for (int n = N - 1; n >= 0; --n) {
    strides[n] = s;
    s *= static_cast<std::int64_t>(grids[n].points.size());
  }

  std::vector<float> regret(total, 0.0f);
  double max_grad = 0.0;
  Matrix a = Matrix::Zero(N, K);
  for (int n = 0; n < N; ++n) {
    const int own = static_cast<int>(grids[n].points.size());
    std::vector<int> id(N, 0);
    std::vector<double> values(own);
    while (true) {
      std::int64_t base = 0;
      for (int m = 0; m < N; ++m) {
        if (m != n) {
          a.row(m) = grids[m].points[id[m]].transpose();
          base += id[m] * strides[m];
        }
      }
      double best = -std::numeric_limits<double>::infinity();
      for (int p = 0; p < own; ++p) {
        const Vector& an = grids[n].points[p];
        const Vector ft = robust_observation(game, a, n, an, spec);
        const Derivatives d = game.derivatives_at(n, an, ft);
        values[p] = d.value.sum();
        max_grad = std::max(max_grad, d.da.norm());
        best = std::max(best, values[p]);
      }
      for (int p = 0; p < own; ++p) {
        float& r = regret[base + p * strides[n]];
        r = std::max(r, static_cast<float>(best - values[p]));
      }
      int m = N - 1;
      while (m >= 0) {
        if (m == n) {
          --m;
          continue;
        }
        if (++id[m] < static_cast<int>(grids[m].points.size())) break;
        id[m] = 0;
        --m;
      }
      if (m < 0) break;
    }
  }

  OracleResult out;
  out.spacing = spacing;
  out.max_gradient = max_grad;
  out.tolerance = spec_grid.tolerance ? *spec_grid.tolerance : 2.0 * spacing * max_grad;
  out.joint_points = total;
  for (std::int64_t j = 0; j < total; ++j) {
    if (regret[j] > out.tolerance) continue;
    const std::vector<int> ids = split_index(j, strides);
    Matrix prof(N, K);
    for (int n = 0; n < N; ++n) prof.row(n) = grids[n].points[ids[n]].transpose();
    out.equilibria.push_back(prof);
    out.joint_index.push_back(ids);
    out.regret.push_back(regret[j]);
  }
  out.cell = assign_cells(regret, out.joint_index, strides, Neighbourhood(grids, strides), out.clusters);
  return out;
}

}  // namespace

OracleResult brute_force_ne(const GameInstance& game, const GridSpec& grid) {
  return enumerate(game, UncertaintySpec::None(game.players()), grid);
}

OracleResult brute_force_rne(const GameInstance& game, const UncertaintySpec& spec,
                             const GridSpec& grid) {
  return enumerate(game, spec, grid);
}

double oracle_distance(const OracleResult& result, const Matrix& a) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.equilibria.size(); ++i) {
    if (result.cell[i] < 0) continue;
    best = std::min(best, (result.equilibria[i] - a).cwiseAbs().maxCoeff());
  }
  return best;
}

bool oracle_contains(const OracleResult& result, const Matrix& a) {
  return oracle_distance(result, a) <= result.spacing * (1.0 + 1e-9);
}

namespace {

struct SphereSearch {
  const GameInstance& game;
  int n;
  const Vector& a_n;
  const Vector& f_n;
  double radius;
  BoundaryMinimum best;

  void visit(const Vector& dir) {
    const Vector f = f_n + radius * dir;
    ++best.evaluations;
    try {
      const double v = game.value_at(n, a_n, f);
      if (v < best.value) {
        best.value = v;
        best.observation = f;
      }
    } catch (const DomainError&) {
    }
  }
};

Vector spherical(double polar, double azimuth) {
  Vector d(3);
  d << std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar);
  return d;
}

}  // namespace

BoundaryMinimum worst_case_grid(const GameInstance& game, int n, const Vector& a_n,
                                const Vector& f_n, double radius, int resolution,
                                std::uint64_t seed) {
  const int K = static_cast<int>(f_n.size());
  SphereSearch s{game, n, a_n, f_n, radius, {}};
  s.best.value = std::numeric_limits<double>::infinity();
  if (radius == 0.0 || K == 0) {
    s.best.value = game.value_at(n, a_n, f_n);
    s.best.observation = f_n;
    s.best.evaluations = 1;
    return s.best;
  }
  const double pi = std::acos(-1.0);
  if (K == 1) {
    s.visit(Vector::Constant(1, 1.0));
    s.visit(Vector::Constant(1, -1.0));
  } else if (K == 2) {
    for (int i = 0; i < resolution; ++i) {
      const double t = 2.0 * pi * i / resolution;
      Vector d(2);
      d << std::cos(t), std::sin(t);
      s.visit(d);
    }
  } else if (K == 3) {
    const int lat = std::max(60, resolution / 20);
    const int lon = 2 * lat;
    double bp = 0.0;
    double ba = 0.0;
    for (int i = 0; i <= lat; ++i) {
      for (int j = 0; j < lon; ++j) {
        const double p = pi * i / lat;
        const double az = 2.0 * pi * j / lon;
        const double before = s.best.value;
        s.visit(spherical(p, az));
        if (s.best.value < before) {
          bp = p;
          ba = az;
        }
      }
    }
    double hp = pi / lat;
    double ha = 2.0 * pi / lon;
    for (int round = 0; round < 6; ++round) {
      const double cp = bp;
      const double ca = ba;
      for (int i = -10; i <= 10; ++i) {
        for (int j = -10; j <= 10; ++j) {
          const double p = cp + hp * i / 10.0;
          const double az = ca + ha * j / 10.0;
          const double before = s.best.value;
          s.visit(spherical(p, az));
          if (s.best.value < before) {
            bp = p;
            ba = az;
          }
        }
      }
      hp /= 5.0;
      ha /= 5.0;
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector best_dir = Vector::Zero(K);
    const int samples = std::max(20000, resolution * 10);
    for (int i = 0; i < samples; ++i) {
      Vector d(K);
      for (int k = 0; k < K; ++k) d(k) = normal(rng);
      d.normalize();
      const double before = s.best.value;
      s.visit(d);
      if (s.best.value < before) best_dir = d;
    }
    for (double scale = 0.1; scale > 1e-6; scale *= 0.5) {
      for (int i = 0; i < 200; ++i) {
        Vector d = best_dir;
        for (int k = 0; k < K; ++k) d(k) += scale * normal(rng);
        d.normalize();
        const double before = s.best.value;
        s.visit(d);
        if (s.best.value < before) best_dir = d;
      }
    }
  }
  return s.best;
}

bool saddle_check(const GameInstance& game, const UncertaintySpec& spec, const Matrix& a, int n,
                  const Vector& f_tilde, double tolerance, int grid_points) {
  const Vector a_n = a.row(n).transpose();
  const Vector f = game.observation(a, n);
  const double radius = spec.mode == UncertaintyMode::kObservation
                            ? spec.absolute_radius(n, f)
                            : (f_tilde - f).norm();
  if ((f_tilde - f).norm() > radius + 1e-8) return false;
  const double u = game.value_at(n, a_n, f_tilde);
  const PlayerGrid g = player_grid(game.space(n), grid_points);
  for (const Vector& p : g.points) {
    if (game.value_at(n, p, f_tilde) > u + tolerance) return false;
  }
  if (spec.mode == UncertaintyMode::kParameter) return true;
  const BoundaryMinimum m = worst_case_grid(game, n, a_n, f, radius, 720);
  return m.value >= u - tolerance;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double step) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x(i)));
    Vector xp = x;
    Vector xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace racg
