#include "racg/vi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace racg {

Matrix vi_mapping(const GameInstance& game, const Matrix& a) {
  Matrix F(game.players(), game.dims());
  for (int n = 0; n < game.players(); ++n) {
    F.row(n) = -game.utility_gradients(a, n).da.transpose();
  }
  return F;
}

namespace {

ViReport finish(ViReport r) {
  const int N = static_cast<int>(r.alpha_min.size());
  r.upsilon = -r.beta_max;
  for (int n = 0; n < N; ++n) r.upsilon(n, n) = r.alpha_min(n);
  r.p_matrix = N <= 16 ? is_p_matrix(r.upsilon) : false;
  r.c_sm = strong_monotonicity_constant(r.upsilon);
  return r;
}

ViReport rate_log_closed_form(const GameInstance& game) {
  const int N = game.players();
  const int K = game.dims();
  const CouplingModel& c = game.coupling();
  Matrix hi(N, K);
  Matrix lo(N, K);
  for (int n = 0; n < N; ++n) {
    hi.row(n) = game.space(n).reachable_upper().transpose();
    lo.row(n) = game.space(n).reachable_lower().transpose();
  }
  ViReport r;
  r.closed_form = true;
  r.alpha_min = Vector::Constant(N, std::numeric_limits<double>::infinity());
  r.beta_max = Matrix::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      if (game.family().high_sinr()) {
        r.alpha_min(n) = std::min(r.alpha_min(n), 1.0 / (hi(n, k) * hi(n, k)));
        continue;
      }
      double top = c.y(n, k) + hi(n, k);
      double bottom = c.y(n, k) + lo(n, k);
      for (int m = 0; m < N; ++m) {
        if (m == n) continue;
        top += c.x(n, m, k) * hi(m, k);
        bottom += c.x(n, m, k) * lo(m, k);
      }
      r.alpha_min(n) = std::min(r.alpha_min(n), 1.0 / (top * top));
      for (int m = 0; m < N; ++m) {
        if (m != n) {
          r.beta_max(n, m) = std::max(r.beta_max(n, m), std::abs(c.x(n, m, k)) / (bottom * bottom));
        }
      }
    }
  }
  return finish(r);
}

}  // namespace

ViReport upsilon_by_sampling(const GameInstance& game, std::uint64_t seed, int random_samples) {
  const int N = game.players();
  const int K = game.dims();
  const CouplingModel& c = game.coupling();
  ViReport r;
  r.alpha_min = Vector::Constant(N, std::numeric_limits<double>::infinity());
  r.beta_max = Matrix::Zero(N, N);

  const auto visit = [&](const Matrix& a) {
    for (int n = 0; n < N; ++n) {
      const Derivatives d = game.utility_gradients(a, n);
      r.alpha_min(n) = std::min(r.alpha_min(n), (-d.daa).minCoeff());
      for (int m = 0; m < N; ++m) {
        if (m == n) continue;
        for (int k = 0; k < K; ++k) {
          r.beta_max(n, m) = std::max(r.beta_max(n, m), std::abs(d.daf(k) * c.x(n, m, k)));
        }
      }
    }
    ++r.samples;
  };

  std::vector<Vector> lo(N);
  std::vector<Vector> hi(N);
  for (int n = 0; n < N; ++n) {
    lo[n] = game.space(n).reachable_lower();
    hi[n] = game.space(n).reachable_upper();
  }
  const auto corner = [&](const auto& bit) {
    Matrix a(N, K);
    for (int n = 0; n < N; ++n) {
      Vector v(K);
      for (int k = 0; k < K; ++k) v(k) = bit(n * K + k) ? hi[n](k) : lo[n](k);
      a.row(n) = game.space(n).project(v).transpose();
    }
    return a;
  };

  std::mt19937_64 rng(seed);
  const int bits = N * K;
  if (bits <= 12) {
    for (std::uint64_t mask = 0; mask < (1ULL << bits); ++mask) {
      visit(corner([&](int i) { return (mask >> i) & 1ULL; }));
    }
  } else {
    std::bernoulli_distribution coin(0.5);
    for (int s = 0; s < 4096; ++s) {
      std::vector<bool> draw(bits);
      for (int i = 0; i < bits; ++i) draw[i] = coin(rng);
      visit(corner([&](int i) { return draw[i]; }));
    }
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < random_samples; ++s) {
    Matrix a(N, K);
    for (int n = 0; n < N; ++n) {
      Vector v(K);
      for (int k = 0; k < K; ++k) v(k) = lo[n](k) + unit(rng) * (hi[n](k) - lo[n](k));
      a.row(n) = game.space(n).project(v).transpose();
    }
    visit(a);
  }
  return finish(r);
}

ViReport build_upsilon(const GameInstance& game, std::uint64_t seed) {
  switch (game.family().tag()) {
    case FamilyTag::kRateLog:
      return rate_log_closed_form(game);
    case FamilyTag::kLinearJackson: {
      ViReport r;
      r.closed_form = true;
      r.alpha_min = Vector::Zero(game.players());
      r.beta_max = Matrix::Zero(game.players(), game.players());
      return finish(r);
    }
    case FamilyTag::kLogTheta:
      break;
  }
  return upsilon_by_sampling(game, seed);
}

bool is_p_matrix(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw InfeasibleError("P-matrix test needs a square matrix");
  if (n > 16) throw InfeasibleError("P-matrix test is limited to 16 rows");
  std::vector<int> idx;
  idx.reserve(n);
  for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
    idx.clear();
    for (int i = 0; i < n; ++i) {
      if ((mask >> i) & 1U) idx.push_back(i);
    }
    const int s = static_cast<int>(idx.size());
    Matrix sub(s, s);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) sub(i, j) = m(idx[i], idx[j]);
    }
    const double det = s == 1 ? sub(0, 0) : sub.partialPivLu().determinant();
    if (!(det > 1e-12)) return false;
  }
  return true;
}

double strong_monotonicity_constant(const Matrix& upsilon) {
  const Matrix sym = 0.5 * (upsilon + upsilon.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().minCoeff());
}

double theorem2_distance_bound(const Vector& delta, double c_sm) {
  if (!(c_sm > 0.0)) throw BoundUnavailable("mapping is not strongly monotone (c_sm = 0)");
  return delta.norm() / c_sm;
}

Vector observation_delta(const GameInstance& game, const Vector& eps, bool relative) {
  if (eps.size() != game.players()) throw IndexError("one radius per player is required");
  if (!relative) return eps;
  const int N = game.players();
  const int K = game.dims();
  Vector delta(N);
  for (int n = 0; n < N; ++n) {
    Vector f(K);
    for (int k = 0; k < K; ++k) {
      double acc = std::abs(game.coupling().y(n, k));
      for (int m = 0; m < N; ++m) {
        if (m == n) continue;
        const double reach = std::max(std::abs(game.space(m).reachable_upper()(k)),
                                      std::abs(game.space(m).reachable_lower()(k)));
        acc += std::abs(game.coupling().x(n, m, k)) * reach;
      }
      f(k) = acc;
    }
    delta(n) = eps(n) * f.norm();
  }
  return delta;
}

std::vector<Matrix> w_matrix(const GameInstance& game, const Matrix& a) {
  const int N = game.players();
  const int K = game.dims();
  std::vector<Matrix> w(K, Matrix::Zero(N, N));
  for (int n = 0; n < N; ++n) {
    const Derivatives d = game.utility_gradients(a, n);
    for (int k = 0; k < K; ++k) {
      for (int m = 0; m < N; ++m) {
        w[k](n, m) = m == n ? d.da(k) : d.df(k) * game.coupling().x(n, m, k);
      }
    }
  }
  return w;
}

double w_norm(const std::vector<Matrix>& w) {
  double best = 0.0;
  for (const auto& wk : w) {
    Eigen::JacobiSVD<Matrix> svd(wk);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

double utility_gap_estimate(const GameInstance& game, const Matrix& a_star, const Vector& delta,
                            double c_sm) {
  if (delta.norm() == 0.0) return 0.0;
  return w_norm(w_matrix(game, a_star)) * theorem2_distance_bound(delta, c_sm);
}

AviSystem build_avi(const GameInstance& game) {
  if (game.family().tag() != FamilyTag::kLogTheta) {
    throw InfeasibleError("affine VI form needs the log-theta family");
  }
  const int N = game.players();
  const int K = game.dims();
  const CouplingModel& c = game.coupling();
  AviSystem s;
  s.theta = game.family().theta();
  s.offsets.resize(N, K);
  s.ratios.assign(K, Matrix::Zero(N, N));
  s.m_max = Matrix::Zero(N, N);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) {
      const double xnn = c.x(n, n, k);
      s.offsets(n, k) = (c.y(n, k) + game.family().offsets()(n, k)) / xnn;
      for (int m = 0; m < N; ++m) {
        s.ratios[k](n, m) = m == n ? 1.0 : c.x(n, m, k) / xnn;
        if (m != n) s.m_max(n, m) = k == 0 ? s.ratios[k](n, m) : std::max(s.m_max(n, m), s.ratios[k](n, m));
      }
    }
  }
  s.monotonicity = Matrix::Identity(N, N) - s.m_max;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s.monotonicity + s.monotonicity.transpose()),
                                           Eigen::EigenvaluesOnly);
  s.lambda_min = es.eigenvalues().minCoeff();
  return s;
}

Matrix avi_mapping(const AviSystem& avi, const Matrix& a) {
  const int N = static_cast<int>(avi.offsets.rows());
  const int K = static_cast<int>(avi.offsets.cols());
  if (a.rows() != N || a.cols() != K) throw IndexError("profile has wrong shape");
  Matrix out = avi.offsets;
  for (int k = 0; k < K; ++k) out.col(k) += avi.ratios[k] * a.col(k);
  return out;
}

Vector corner_norms(const std::vector<StrategySpace>& spaces) {
  Vector p(static_cast<int>(spaces.size()));
  for (std::size_t n = 0; n < spaces.size(); ++n) p(n) = spaces[n].reachable_upper().norm();
  return p;
}

bool avi_uniqueness_check(const AviSystem& avi, const std::vector<StrategySpace>& spaces) {
  const Vector p = corner_norms(spaces);
  const Vector rhs = avi.m_max * p;
  for (int n = 0; n < p.size(); ++n) {
    if (!(p(n) > rhs(n))) return false;
  }
  return true;
}

bool avi_reversed_condition(const AviSystem& avi, const std::vector<StrategySpace>& spaces) {
  const Vector p = corner_norms(spaces);
  const Vector rhs = avi.m_max * p;
  for (int n = 0; n < p.size(); ++n) {
    if (!(p(n) < rhs(n))) return false;
  }
  return true;
}

double theorem3_distance_bound(const Matrix& eps, const Matrix& aggregate) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (aggregate + aggregate.transpose()),
                                           Eigen::EigenvaluesOnly);
  const double lambda = es.eigenvalues().minCoeff();
  if (!(lambda > 0.0)) throw BoundUnavailable("aggregate matrix is not positive definite");
  double e = 0.0;
  for (int n = 0; n < eps.rows(); ++n) e = std::max(e, eps.row(n).cwiseAbs().maxCoeff());
  return e * e / lambda;
}

}  // namespace racg
