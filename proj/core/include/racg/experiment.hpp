#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "racg/models.hpp"
#include "racg/scenario_io.hpp"
#include "racg/solvers.hpp"

namespace racg {

struct ExperimentConfig {
  std::string kind = "power";  // power | jackson
  PowerScenarioParams power;
  JacksonScenarioParams jackson;
  std::optional<std::string> scenario_file;  // replaces generated scenarios when set
  SolverConfig solver;
  std::string solver_name = "proximal";      // proximal | best-response
  std::vector<double> eps_list{0.1, 0.3, 0.5};
  bool relative = true;
  int repetitions = 100;
  std::uint64_t seed = 1;
  double cross_scale = 1.0;                  // multiplies every cross gain
  int perturbed_iterations = 3000;           // jackson runs
  std::string out_dir;                       // empty: nothing written

  void validate() const;
  nlohmann::json to_json() const;
  // FNV-1a of the canonical JSON, hex encoded.
  std::string hash() const;
};

struct MetricsRecord {
  std::uint64_t seed = 0;
  std::string config_hash;
  int repetition = 0;
  std::string kind;
  std::string solver;
  double eps = 0.0;
  double v_star = 0.0;          // nominal social utility at the NE
  double u_star = 0.0;          // robust social utility at the RNE
  double ratio = 0.0;
  double distance = 0.0;        // ||a* - a~*||_2
  double theorem2_bound = 0.0;  // NaN when unavailable
  double theorem3_bound = 0.0;  // NaN when unavailable
  double eta = 0.0;             // NaN unless opportunistic
  double delay_excess = 0.0;    // NaN unless jackson
  bool converged = false;
  int iterations = 0;
  bool p_matrix = false;
  double c_sm = 0.0;
  std::string error;            // solver failure message, empty on success
};

const std::vector<std::string>& metrics_csv_header();
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
// One row per (record, metric) pair.
void write_metrics_long_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
nlohmann::json metrics_to_json(const std::vector<MetricsRecord>& records);

// Runs every repetition and radius; records are sorted by (repetition, solver, eps).
// Writes metrics.csv, metrics_long.csv and summary.json to out_dir when set.
std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config);

struct JacksonRobustness {
  double d_star = 0.0;  // delay at the nominal equilibrium
  double d_robust = 0.0;
  double d_gradient = 0.0;
  double d_jacobi = 0.0;
  bool robust_converged = false;
  bool gradient_converged = false;
  bool jacobi_converged = false;
};

// Time-averaged realized delay excess over the last half of the iterations, in percent.
// Unstable realized loads count as +inf.
JacksonRobustness jackson_robustness(const JacksonScenario& s, double eps, std::uint64_t noise_seed,
                                     int iterations = 3000);

struct ConvergenceSweep {
  JacksonScenarioParams params;
  std::vector<double> routing_grid{0.0, 0.2, 0.4, 0.6, 0.8};
  std::vector<double> eps_list{0.0, 0.2, 0.4, 0.6, 0.8};
  std::vector<std::uint64_t> seeds;
  SolverConfig solver;
};

struct ConvergenceCell {
  double routing = 0.0;
  double eps = 0.0;
  double probability = 0.0;
  int runs = 0;
};

// Converged iff the robust proximal run converges and every iterate keeps the network stable
// under worst-case loads.
std::vector<ConvergenceCell> convergence_probability(const ConvergenceSweep& sweep);
bool stable_under_worst_case(const JacksonScenario& s, const GameInstance& game, const Matrix& psi,
                             double eps);

struct Checkpoint {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool reference_only = false;
  std::string note;
};

// Recomputes the published two-user example quantities from their printed inputs.
std::vector<Checkpoint> reference_checkpoints();
bool checkpoints_passed(const std::vector<Checkpoint>& checkpoints);

}  // namespace racg
