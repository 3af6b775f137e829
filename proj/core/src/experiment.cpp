#include "racg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <tuple>

#include "racg/vi.hpp"

namespace racg {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (kind != "power" && kind != "jackson") throw InfeasibleError("kind must be power or jackson");
  if (repetitions < 1) throw InfeasibleError("repetitions must be at least 1");
  if (eps_list.empty()) throw InfeasibleError("uncertainty list is empty");
  for (double e : eps_list) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw InfeasibleError("uncertainty radii must be >= 0");
  }
  if (solver_name != "proximal" && solver_name != "best-response") {
    throw InfeasibleError("solver must be proximal or best-response");
  }
  if (!(cross_scale > 0.0)) throw InfeasibleError("cross-gain scale must be positive");
}

json ExperimentConfig::to_json() const {
  return {{"kind", kind},
          {"power",
           {{"players", power.players},
            {"dims", power.dims},
            {"regime", regime_name(power.regime)},
            {"band", {power.band_lo, power.band_hi}},
            {"noise", power.noise},
            {"power_max", power.power_max},
            {"power_cap", power.power_cap}}},
          {"jackson",
           {{"nodes", jackson.nodes},
            {"classes", jackson.classes},
            {"routing_total", jackson.routing_total},
            {"mu", {jackson.mu_lo, jackson.mu_hi}},
            {"min_rate", {jackson.min_rate_lo, jackson.min_rate_hi}},
            {"cap_factor", jackson.cap_factor}}},
          {"scenario_file", scenario_file ? json(*scenario_file) : json(nullptr)},
          {"solver",
           {{"name", solver_name},
            {"max_iterations", solver.max_iterations},
            {"tolerance", solver.tolerance},
            {"sequential", solver.scheme == UpdateScheme::kSequential},
            {"inner_tolerance", solver.inner_tolerance}}},
          {"eps_list", eps_list},
          {"relative", relative},
          {"repetitions", repetitions},
          {"seed", seed},
          {"cross_scale", cross_scale},
          {"perturbed_iterations", perturbed_iterations}};
}

std::string ExperimentConfig::hash() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::vector<std::string>& metrics_csv_header() {
  static const std::vector<std::string> header = {
      "seed",       "config_hash",    "repetition",     "kind",   "solver",       "eps",
      "v_star",     "u_star",         "ratio",          "distance", "theorem2_bound",
      "theorem3_bound", "eta",        "delay_excess",   "converged", "iterations", "p_matrix",
      "c_sm",       "error"};
  return header;
}

namespace {

std::vector<std::pair<std::string, double>> numeric_fields(const MetricsRecord& r) {
  return {{"v_star", r.v_star},
          {"u_star", r.u_star},
          {"ratio", r.ratio},
          {"distance", r.distance},
          {"theorem2_bound", r.theorem2_bound},
          {"theorem3_bound", r.theorem3_bound},
          {"eta", r.eta},
          {"delay_excess", r.delay_excess},
          {"converged", r.converged ? 1.0 : 0.0},
          {"iterations", static_cast<double>(r.iterations)},
          {"p_matrix", r.p_matrix ? 1.0 : 0.0},
          {"c_sm", r.c_sm}};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  const auto& header = metrics_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : records) {
    out << r.seed << ',' << r.config_hash << ',' << r.repetition << ',' << r.kind << ','
        << r.solver << ',' << format_number(r.eps);
    for (const auto& [name, value] : numeric_fields(r)) {
      if (name == "converged" || name == "iterations" || name == "p_matrix") {
        out << ',' << static_cast<long long>(value);
      } else {
        out << ',' << format_number(value);
      }
    }
    out << ',' << csv_escape(r.error) << '\n';
  }
}

void write_metrics_long_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << "seed,config_hash,repetition,kind,solver,eps,metric,value\n";
  for (const auto& r : records) {
    for (const auto& [name, value] : numeric_fields(r)) {
      out << r.seed << ',' << r.config_hash << ',' << r.repetition << ',' << r.kind << ','
          << r.solver << ',' << format_number(r.eps) << ',' << name << ','
          << format_number(value) << '\n';
    }
  }
}

json metrics_to_json(const std::vector<MetricsRecord>& records) {
  json rows = json::array();
  for (const auto& r : records) {
    json row = {{"seed", r.seed},
                {"config_hash", r.config_hash},
                {"repetition", r.repetition},
                {"kind", r.kind},
                {"solver", r.solver},
                {"eps", r.eps},
                {"error", r.error}};
    for (const auto& [name, value] : numeric_fields(r)) {
      row[name] = std::isfinite(value) ? json(value) : json(nullptr);
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

MetricsRecord base_record(const ExperimentConfig& c, const std::string& hash, int rep,
                          std::uint64_t seed, const std::string& solver, double eps) {
  MetricsRecord r;
  r.seed = seed;
  r.config_hash = hash;
  r.repetition = rep;
  r.kind = c.kind;
  r.solver = solver;
  r.eps = eps;
  r.theorem2_bound = kNaN;
  r.theorem3_bound = kNaN;
  r.eta = kNaN;
  r.delay_excess = kNaN;
  r.ratio = kNaN;
  return r;
}

double robust_social(const GameInstance& game, const Matrix& a, const UncertaintySpec& spec) {
  double total = 0.0;
  for (int n = 0; n < game.players(); ++n) total += psi(game, a, n, spec);
  return total;
}

void power_repetition(const ExperimentConfig& c, const std::string& hash, int rep,
                      std::vector<MetricsRecord>& out) {
  const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(rep);
  PowerControlScenario scenario;
  if (c.scenario_file) {
    const Scenario loaded = load_scenario(*c.scenario_file);
    if (!std::holds_alternative<PowerControlScenario>(loaded)) {
      throw InfeasibleError("scenario file is not a power scenario");
    }
    scenario = std::get<PowerControlScenario>(loaded);
  } else {
    scenario = generate_power_scenario(c.power, seed);
  }
  if (c.cross_scale != 1.0) scenario = scale_cross_gains(scenario, c.cross_scale);

  const bool closed = c.solver_name == "best-response";
  const GameInstance game = closed ? power_game_as_log_theta(scenario) : make_power_game(scenario);
  const ViReport report = build_upsilon(make_power_game(scenario), seed);
  const Matrix a0 = game.initial_profile();
  const int N = game.players();
  const UncertaintySpec none = UncertaintySpec::None(N);
  const RunTrace nominal = closed ? best_response_sweep(game, none, c.solver, a0)
                                  : run_distributed(game, none, c.solver, a0);
  const Matrix a_star = nominal.final_profile();
  const double v_star = game.social_utility(a_star);
  std::optional<AviSystem> avi;
  if (closed) avi = build_avi(game);

  for (double eps : c.eps_list) {
    MetricsRecord r = base_record(c, hash, rep, seed, c.solver_name, eps);
    r.p_matrix = report.p_matrix;
    r.c_sm = report.c_sm;
    r.v_star = v_star;
    try {
      UncertaintySpec spec = closed ? UncertaintySpec::Parameter(Matrix::Constant(N, game.dims(), eps))
                                    : UncertaintySpec::Uniform(N, eps, c.relative);
      RunTrace robust = nominal;
      if (eps > 0.0) {
        robust = closed ? best_response_sweep(game, spec, c.solver, a0)
                        : run_distributed(game, spec, c.solver, a0);
      }
      const Matrix& a_tilde = robust.final_profile();
      r.u_star = robust_social(game, a_tilde, spec);
      r.ratio = r.u_star / v_star;
      r.distance = (a_star - a_tilde).norm();
      r.converged = robust.converged;
      r.iterations = robust.iterations;
      if (report.c_sm > 0.0 && !closed) {
        r.theorem2_bound = theorem2_distance_bound(
            observation_delta(game, Vector::Constant(N, eps), c.relative), report.c_sm);
      }
      if (avi && avi->lambda_min > 0.0) {
        r.theorem3_bound = theorem3_distance_bound(spec.param_radius, avi->monotonicity);
      }
    } catch (const Error& e) {
      r.error = e.what();
    }
    out.push_back(r);
  }
}

void jackson_repetition(const ExperimentConfig& c, const std::string& hash, int rep,
                        std::vector<MetricsRecord>& out) {
  const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(rep);
  JacksonScenario scenario;
  if (c.scenario_file) {
    const Scenario loaded = load_scenario(*c.scenario_file);
    if (!std::holds_alternative<JacksonScenario>(loaded)) {
      throw InfeasibleError("scenario file is not a jackson scenario");
    }
    scenario = std::get<JacksonScenario>(loaded);
  } else {
    scenario = generate_jackson_scenario(c.jackson, seed);
  }
  const GameInstance game = make_jackson_game(scenario);
  const RunTrace nominal =
      run_distributed(game, UncertaintySpec::None(game.players()), c.solver, game.initial_profile());
  const double v_star = game.social_utility(nominal.final_profile());
  for (double eps : c.eps_list) {
    try {
      const JacksonRobustness j = jackson_robustness(scenario, eps, seed, c.perturbed_iterations);
      const std::tuple<const char*, double, bool> rows[] = {
          {"proximal-robust", j.d_robust, j.robust_converged},
          {"gradient-play", j.d_gradient, j.gradient_converged},
          {"jacobi", j.d_jacobi, j.jacobi_converged}};
      for (const auto& [name, d, conv] : rows) {
        MetricsRecord r = base_record(c, hash, rep, seed, name, eps);
        r.v_star = v_star;
        r.delay_excess = d;
        r.converged = conv;
        r.iterations = c.perturbed_iterations;
        out.push_back(r);
      }
    } catch (const Error& e) {
      MetricsRecord r = base_record(c, hash, rep, seed, "proximal-robust", eps);
      r.error = e.what();
      out.push_back(r);
    }
  }
}

}  // namespace

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string hash = config.hash();
  std::vector<MetricsRecord> records;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    if (config.kind == "power") {
      power_repetition(config, hash, rep, records);
    } else {
      jackson_repetition(config, hash, rep, records);
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const MetricsRecord& a, const MetricsRecord& b) {
    return std::tie(a.repetition, a.solver, a.eps) < std::tie(b.repetition, b.solver, b.eps);
  });
  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    std::ofstream wide(dir / "metrics.csv");
    std::ofstream longf(dir / "metrics_long.csv");
    std::ofstream summary(dir / "summary.json");
    if (!wide || !longf || !summary) throw Error("cannot write results to " + config.out_dir);
    write_metrics_csv(wide, records);
    write_metrics_long_csv(longf, records);
    summary << json{{"config", config.to_json()},
                    {"config_hash", hash},
                    {"records", metrics_to_json(records)}}
                   .dump(2)
            << '\n';
  }
  return records;
}

namespace {

double averaged_excess(const JacksonScenario& s, const std::vector<Matrix>& realized, double d_star) {
  const std::size_t start = realized.size() / 2;
  double total = 0.0;
  int count = 0;
  for (std::size_t t = start; t < realized.size(); ++t) {
    try {
      total += total_delay(s, realized[t]);
    } catch (const UnstableError&) {
      return std::numeric_limits<double>::infinity();
    }
    ++count;
  }
  return delay_excess_percent(total / count, d_star);
}

}  // namespace

JacksonRobustness jackson_robustness(const JacksonScenario& s, double eps, std::uint64_t noise_seed,
                                     int iterations) {
  const GameInstance game = make_jackson_game(s);
  const int N = game.players();
  const Matrix a0 = game.initial_profile();
  SolverConfig nominal_cfg;
  const Matrix ne = run_distributed(game, UncertaintySpec::None(N), nominal_cfg, a0).final_profile();
  JacksonRobustness out;
  out.d_star = total_delay(s, ne);

  SolverConfig cfg;
  cfg.max_iterations = iterations;
  cfg.record_history = false;
  const Perturbation noise{eps, noise_seed};
  const UncertaintySpec robust = UncertaintySpec::Uniform(N, eps, true);
  const UncertaintySpec none = UncertaintySpec::None(N);

  const PerturbedRun r = run_perturbed(game, robust, Dynamics::kProximal, cfg, a0, noise);
  const PerturbedRun g = run_perturbed(game, none, Dynamics::kGradientPlay, cfg, a0, noise);
  const PerturbedRun j = run_perturbed(game, none, Dynamics::kJacobi, cfg, a0, noise);
  out.d_robust = averaged_excess(s, r.realized, out.d_star);
  out.d_gradient = averaged_excess(s, g.realized, out.d_star);
  out.d_jacobi = averaged_excess(s, j.realized, out.d_star);
  out.robust_converged = r.planned.converged;
  out.gradient_converged = g.planned.converged;
  out.jacobi_converged = j.planned.converged;
  return out;
}

bool stable_under_worst_case(const JacksonScenario& s, const GameInstance& game, const Matrix& psi,
                             double eps) {
  const Matrix loads = node_loads(s, psi);
  const double scale = 1.0 / std::sqrt(static_cast<double>(s.classes));
  for (int n = 0; n < s.nodes; ++n) {
    const double shift = eps * game.observation(psi, n).norm() * scale;
    for (int k = 0; k < s.classes; ++k) {
      if (loads(n, k) + shift >= s.service_rate(n, k) - 1e-6) return false;
    }
  }
  return true;
}

std::vector<ConvergenceCell> convergence_probability(const ConvergenceSweep& sweep) {
  if (sweep.seeds.empty()) throw InfeasibleError("convergence sweep needs at least one seed");
  if (sweep.routing_grid.empty() || sweep.eps_list.empty()) {
    throw InfeasibleError("convergence sweep needs routing and uncertainty grids");
  }
  std::vector<ConvergenceCell> cells;
  for (double rho : sweep.routing_grid) {
    JacksonScenarioParams params = sweep.params;
    params.routing_total = rho;
    std::vector<int> hits(sweep.eps_list.size(), 0);
    for (std::uint64_t seed : sweep.seeds) {
      const JacksonScenario s = generate_jackson_scenario(params, seed);
      const GameInstance game = make_jackson_game(s);
      const Matrix a0 = game.initial_profile();
      for (std::size_t e = 0; e < sweep.eps_list.size(); ++e) {
        const double eps = sweep.eps_list[e];
        SolverConfig cfg = sweep.solver;
        cfg.record_history = true;
        cfg.record_utilities = false;
        const RunTrace tr =
            run_distributed(game, UncertaintySpec::Uniform(game.players(), eps, true), cfg, a0);
        bool ok = tr.converged;
        for (std::size_t t = 0; ok && t < tr.profiles.size(); ++t) {
          ok = stable_under_worst_case(s, game, tr.profiles[t], eps);
        }
        hits[e] += ok;
      }
    }
    for (std::size_t e = 0; e < sweep.eps_list.size(); ++e) {
      ConvergenceCell c;
      c.routing = rho;
      c.eps = sweep.eps_list[e];
      c.runs = static_cast<int>(sweep.seeds.size());
      c.probability = static_cast<double>(hits[e]) / c.runs;
      cells.push_back(c);
    }
  }
  return cells;
}

std::vector<Checkpoint> reference_checkpoints() {
  std::vector<Checkpoint> out;
  Vector ne(4);
  Vector rne(4);
  ne << 0.5, 0.5, 0.4, 0.6;
  rne << 0.4, 0.6, 0.9, 0.1;
  const double distance = (ne - rne).norm();
  out.push_back({"strategy_distance", distance, 0.7211, 5e-4,
                 std::abs(distance - 0.7211) <= 5e-4, false,
                 "||a* - a~*||_2 from the printed equilibria"});
  out.push_back({"distance_within_bound", distance, 1.3115, 0.0, distance <= 1.3115, false,
                 "recomputed distance against the printed bound"});
  Matrix upsilon(2, 2);
  upsilon << 1.5432, -0.016, -0.0012, 1.221;
  const bool p = is_p_matrix(upsilon);
  out.push_back({"upsilon_p_matrix", p ? 1.0 : 0.0, 1.0, 0.0, p, false,
                 "principal minors of the printed Upsilon"});
  const Vector delta = Vector::Constant(2, 0.8);
  const double c_back = delta.norm() / 1.3115;
  const double bound = theorem2_distance_bound(delta, c_back);
  out.push_back({"bound_back_derived", bound, 1.3115, 5e-4, std::abs(bound - 1.3115) <= 5e-4, false,
                 "Delta = (0.8, 0.8) with c_sm back-derived as " + format_number(c_back)});
  const double c_sym = strong_monotonicity_constant(upsilon);
  out.push_back({"c_sm_symmetrized", c_sym, c_back, 0.0, true, true,
                 "lambda_min of the symmetrized printed Upsilon; differs from the back-derived "
                 "constant"});
  const double gap = std::sqrt(0.9091) * 1.3115;
  out.push_back({"utility_gap_estimate", gap, 1.02, 0.0, true, true,
                 "sqrt(0.9091) * 1.3115 from printed inputs; printed estimate 1.02, simulated "
                 "1.015; inputs incomplete, not asserted"});
  return out;
}

bool checkpoints_passed(const std::vector<Checkpoint>& checkpoints) {
  return std::all_of(checkpoints.begin(), checkpoints.end(),
                     [](const Checkpoint& c) { return c.reference_only || c.passed; });
}

}  // namespace racg
