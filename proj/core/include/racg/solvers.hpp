#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "racg/robust.hpp"
#include "racg/vi.hpp"

namespace racg {

enum class UpdateScheme { kSimultaneous, kSequential };

struct SolverConfig {
  int max_iterations = 5000;
  double tolerance = 1e-6;  // stop when ||a(t) - a(t-1)||_F <= tolerance
  UpdateScheme scheme = UpdateScheme::kSimultaneous;
  // Gradient play step; unset means 0.1 / (1 + curvature estimate at a0).
  std::optional<double> step_size;
  double inner_tolerance = 1e-8;
  int inner_max_iterations = 500;
  // Keep every iterate and utility row; otherwise only the last one.
  bool record_history = true;
  // With record_history, also evaluate Psi at every iterate.
  bool record_utilities = true;
};

struct Preconditions {
  bool p_matrix = false;
  bool third_partials_vanish = false;
  bool satisfied() const { return p_matrix && third_partials_vanish; }
};

struct RunTrace {
  std::vector<Matrix> profiles;  // a(0), a(1), ...
  std::vector<Vector> utilities; // Psi_n at each stored profile
  std::vector<double> step_norms;
  bool converged = false;
  int iterations = 0;
  std::optional<Preconditions> preconditions;
  int inner_failures = 0;

  const Matrix& final_profile() const { return profiles.back(); }
};

// --- inner solver ---

struct InnerResult {
  Vector x;
  double value = 0.0;
  double residual = 0.0;  // ||x - P(x + grad)||
  int iterations = 0;
  bool converged = false;
};

// Returns the objective value; fills grad and a positive diagonal scaling when non-null.
using ConcaveObjective = std::function<double(const Vector& x, Vector* grad, Vector* scaling)>;

// Diagonally scaled projected gradient ascent with Armijo backtracking (0.5 / 0.5).
InnerResult maximize_concave(const StrategySpace& space, const ConcaveObjective& objective,
                             const Vector& x0, double tolerance = 1e-8, int max_iterations = 500);

// --- response maps ---

// argmax Psi_n(a_n, b_{-n}) - 1/2 ||a_n - b_n||^2. Closed form for log-theta games under
// parameter-level (or zero) uncertainty, generic ascent otherwise.
Vector proximal_step(const GameInstance& game, const UncertaintySpec& spec, const Matrix& b, int n,
                     const SolverConfig& config = {});
InnerResult proximal_step_generic(const GameInstance& game, const UncertaintySpec& spec,
                                  const Matrix& b, int n, const SolverConfig& config = {});

// argmax Psi_n(a_n, a_{-n}) over the user's space.
Vector best_response(const GameInstance& game, const UncertaintySpec& spec, const Matrix& a, int n,
                     const SolverConfig& config = {});

// argmin c.a over a strategy space (greedy fill, ties to the lowest index).
Vector minimize_linear(const Vector& c, const StrategySpace& space);

// --- dynamics ---

Preconditions evaluate_preconditions(const GameInstance& game, const Matrix& a0);

RunTrace run_distributed(const GameInstance& game, const UncertaintySpec& spec,
                         const SolverConfig& config, const Matrix& a0);
RunTrace best_response_sweep(const GameInstance& game, const UncertaintySpec& spec,
                             const SolverConfig& config, const Matrix& a0);
RunTrace gradient_play(const GameInstance& game, const SolverConfig& config, const Matrix& a0,
                       const UncertaintySpec* spec = nullptr);
RunTrace jacobi_update(const GameInstance& game, const SolverConfig& config, const Matrix& a0,
                       const UncertaintySpec* spec = nullptr);

double default_gradient_step(const GameInstance& game, const Matrix& a0);

struct OpportunisticConfig {
  double chi = 0.05;
  double delta = 1e-4;
  SolverConfig stage_config;
  int max_expansions = 40;
  bool relative = true;
};

struct OpportunisticResult {
  RunTrace stage1;
  Matrix best_profile;
  double nominal_social = 0.0;  // v* at the stage-1 equilibrium
  double best_social = 0.0;     // nominal social utility at best_profile
  double final_eps = 0.0;       // radius that produced best_profile
  int expansions = 0;
  bool triggered = false;
  std::vector<double> eps_history;
  std::vector<double> social_history;
  double eta() const;
};

// True when some user has alpha_n < sum_{m != n} beta_nm.
bool multiple_equilibria_suspected(const ViReport& report);

OpportunisticResult opportunistic_run(const GameInstance& game, const OpportunisticConfig& config,
                                      const Matrix& a0);
OpportunisticResult opportunistic_run(const GameInstance& game, const OpportunisticConfig& config);

// --- dynamics under execution noise ---

enum class Dynamics { kProximal, kBestResponse, kGradientPlay, kJacobi };

struct Perturbation {
  double eps = 0.0;        // realized = planned * (1 + eps * xi), xi ~ U[-1, 1]
  std::uint64_t seed = 0;  // same seed gives the same noise sequence for every dynamics
};

struct PerturbedRun {
  RunTrace planned;
  std::vector<Matrix> realized;
};

// Each iteration the planned profile is executed with multiplicative noise. A user re-anchors on
// the realized profile unless the realized observation lies inside its own uncertainty region.
PerturbedRun run_perturbed(const GameInstance& game, const UncertaintySpec& spec, Dynamics dynamics,
                           const SolverConfig& config, const Matrix& a0,
                           const Perturbation& perturbation);

}  // namespace racg
