// racg: command line front end for the robust game library.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "racg/experiment.hpp"
#include "racg/scenario_io.hpp"
#include "racg/solvers.hpp"
#include "racg/vi.hpp"

using namespace racg;
using nlohmann::json;

namespace {

struct ScenarioOptions {
  std::string file;
  std::string kind = "power";
  std::string regime = "unique";
  int players = 3;
  int dims = 8;
  double routing = 0.3;
  std::uint64_t seed = 1;
  double scale = 1.0;  // cross-gain multiplier for generated power scenarios
};

void add_scenario_options(CLI::App* app, ScenarioOptions& o) {
  app->add_option("--scenario", o.file, "Scenario JSON file (generated when omitted)");
  app->add_option("--kind", o.kind, "power | jackson")->check(CLI::IsMember({"power", "jackson"}));
  app->add_option("--regime", o.regime, "unique | multi | moderate | high");
  app->add_option("--players", o.players, "Users (power) or nodes (jackson)")->check(CLI::PositiveNumber);
  app->add_option("--dims", o.dims, "Sub-channels or classes")->check(CLI::PositiveNumber);
  app->add_option("--routing", o.routing, "Routing total 1 - r_m0 for jackson scenarios");
  app->add_option("--seed", o.seed, "Scenario seed");
  app->add_option("--scale", o.scale, "Cross-gain multiplier")->check(CLI::PositiveNumber);
}

Scenario make_scenario(const ScenarioOptions& o) {
  if (!o.file.empty()) return load_scenario(o.file);
  if (o.kind == "jackson") {
    JacksonScenarioParams p;
    p.nodes = o.players;
    p.classes = o.dims;
    p.routing_total = o.routing;
    return generate_jackson_scenario(p, o.seed);
  }
  PowerScenarioParams p;
  p.players = o.players;
  p.dims = o.dims;
  p.regime = regime_from_name(o.regime);
  PowerControlScenario s = generate_power_scenario(p, o.seed);
  return o.scale == 1.0 ? s : scale_cross_gains(s, o.scale);
}

GameInstance game_of(const Scenario& s) {
  if (const auto* p = std::get_if<PowerControlScenario>(&s)) return make_power_game(*p);
  return make_jackson_game(std::get<JacksonScenario>(s));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + path);
  out << text << '\n';
}

std::vector<double> parse_eps(const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < list.size()) {
    const std::size_t end = std::min(list.find(',', pos), list.size());
    out.push_back(std::stod(list.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

int cmd_generate(const ScenarioOptions& o, const std::string& out) {
  write_text(out, to_json(make_scenario(o)).dump(2));
  return 0;
}

int cmd_analyze(const ScenarioOptions& o) {
  const Scenario s = make_scenario(o);
  const GameInstance g = game_of(s);
  const ViReport r = build_upsilon(g, o.seed);
  json j = {{"players", g.players()},
            {"dims", g.dims()},
            {"family", g.family().name()},
            {"upsilon", matrix_to_json(r.upsilon)},
            {"p_matrix", r.p_matrix},
            {"c_sm", r.c_sm},
            {"closed_form", r.closed_form},
            {"samples", r.samples},
            {"multiple_equilibria_suspected", multiple_equilibria_suspected(r)}};
  if (const auto* p = std::get_if<PowerControlScenario>(&s)) {
    const GameInstance lt = power_game_as_log_theta(*p);
    const AviSystem avi = build_avi(lt);
    j["avi_unique"] = avi_uniqueness_check(avi, lt.spaces());
    j["avi_lambda_min"] = avi.lambda_min;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_solve(const ScenarioOptions& o, const std::string& solver, double eps, bool relative,
              const std::string& out, int max_iter, double tol) {
  const Scenario s = make_scenario(o);
  const GameInstance g = game_of(s);
  const int N = g.players();
  const UncertaintySpec spec = eps > 0.0 ? UncertaintySpec::Uniform(N, eps, relative) : UncertaintySpec::None(N);
  SolverConfig c;
  c.max_iterations = max_iter;
  c.tolerance = tol;
  const Matrix a0 = g.initial_profile();
  RunTrace tr;
  if (solver == "proximal") {
    tr = run_distributed(g, spec, c, a0);
  } else if (solver == "best-response") {
    const auto* p = std::get_if<PowerControlScenario>(&s);
    if (!p) throw Error("best-response needs a power scenario");
    tr = best_response_sweep(power_game_as_log_theta(*p), spec, c, a0);
  } else if (solver == "gradient") {
    tr = gradient_play(g, c, a0, &spec);
  } else {
    tr = jacobi_update(g, c, a0, &spec);
  }
  json j = trace_to_json(tr);
  j["solver"] = solver;
  j["eps"] = eps;
  j["social_utility"] = g.social_utility(tr.final_profile());
  j["final_profile"] = matrix_to_json(tr.final_profile());
  write_text(out, j.dump(2));
  if (!out.empty() && out != "-") {
    std::printf("%s: %s after %d iterations, social utility %.6g\n", solver.c_str(),
                tr.converged ? "converged" : "not converged", tr.iterations, g.social_utility(tr.final_profile()));
  }
  return 0;
}

int cmd_sweep(ExperimentConfig cfg, const std::string& eps_list, const std::string& scenario_file,
              double scale) {
  cfg.eps_list = parse_eps(eps_list);
  if (!scenario_file.empty()) cfg.scenario_file = scenario_file;
  cfg.repetitions = std::max(1, static_cast<int>(std::lround(cfg.repetitions * scale)));
  cfg.solver.record_history = false;
  const auto records = run_experiment(cfg);
  if (cfg.out_dir.empty()) {
    write_metrics_csv(std::cout, records);
  } else {
    std::printf("%zu records written to %s (config %s)\n", records.size(), cfg.out_dir.c_str(), cfg.hash().c_str());
  }
  int errors = 0;
  for (const auto& r : records) errors += !r.error.empty();
  if (errors) std::fprintf(stderr, "%d runs failed, see the error column\n", errors);
  return 0;
}

int cmd_jackson_prob(const std::string& eps_list, std::uint64_t seed, int reps, double scale,
                     const std::string& out_dir) {
  ConvergenceSweep sw;
  sw.params.min_rate_lo = 0.3;
  sw.params.min_rate_hi = 0.9;
  sw.eps_list = parse_eps(eps_list);
  sw.solver.tolerance = 1e-8;
  sw.solver.max_iterations = 50000;
  const int n = std::max(1, static_cast<int>(std::lround(reps * scale)));
  for (int i = 0; i < n; ++i) sw.seeds.push_back(seed + i);
  const auto cells = convergence_probability(sw);
  std::string csv = "routing_total,eps,probability,runs\n";
  for (const auto& c : cells) {
    char line[128];
    std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%d\n", c.routing, c.eps, c.probability, c.runs);
    csv += line;
  }
  if (out_dir.empty()) {
    std::cout << csv;
  } else {
    write_text((std::filesystem::path(out_dir) / "convergence_probability.csv").string(), csv);
  }
  return 0;
}

int cmd_checkpoints() {
  const auto cps = reference_checkpoints();
  for (const auto& c : cps) {
    const char* status = c.reference_only ? "INFO" : c.passed ? "PASS" : "FAIL";
    std::printf("%s  %-28s value %.6g  reference %.6g  tol %.1e  %s\n", status, c.name.c_str(), c.value,
                c.reference, c.tolerance, c.note.c_str());
  }
  return checkpoints_passed(cps) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust additively coupled games: equilibria, bounds and experiment sweeps"};
  app.require_subcommand(1);

  ScenarioOptions gen_opts;
  std::string gen_out = "-";
  auto* gen = app.add_subcommand("generate", "Write a generated scenario as JSON");
  add_scenario_options(gen, gen_opts);
  gen->add_option("-o,--out", gen_out, "Output file (stdout by default)");

  ScenarioOptions an_opts;
  auto* analyze = app.add_subcommand("analyze", "Upsilon matrix, P-matrix verdict and monotonicity constant");
  add_scenario_options(analyze, an_opts);

  ScenarioOptions solve_opts;
  std::string solver = "proximal";
  double eps = 0.0;
  bool absolute = false;
  std::string trace_out = "-";
  int max_iter = 5000;
  double tol = 1e-6;
  auto* solve = app.add_subcommand("solve", "One equilibrium run; writes the trace as JSON");
  add_scenario_options(solve, solve_opts);
  solve->add_option("--solver", solver, "proximal | best-response | gradient | jacobi")
      ->check(CLI::IsMember({"proximal", "best-response", "gradient", "jacobi"}));
  solve->add_option("--eps", eps, "Uncertainty radius")->check(CLI::NonNegativeNumber);
  solve->add_flag("--absolute", absolute, "Absolute instead of relative radius");
  solve->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  solve->add_option("--tol", tol, "Step-norm stopping tolerance")->check(CLI::PositiveNumber);
  solve->add_option("-o,--out", trace_out, "Trace file (stdout by default)");

  ExperimentConfig sweep_cfg;
  std::string sweep_eps = "0.1,0.3,0.5";
  std::string sweep_scenario;
  std::string sweep_regime = "unique";
  double sweep_scale = 1.0;
  auto* sweep = app.add_subcommand("sweep", "Seeded sweep over uncertainty radii; writes CSV and JSON");
  sweep->add_option("--kind", sweep_cfg.kind, "power | jackson")->check(CLI::IsMember({"power", "jackson"}));
  sweep->add_option("--regime", sweep_regime, "Power regime");
  sweep->add_option("--players", sweep_cfg.power.players, "Power users")->check(CLI::PositiveNumber);
  sweep->add_option("--dims", sweep_cfg.power.dims, "Power sub-channels")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_cfg.seed, "Base seed");
  sweep->add_option("--eps-list", sweep_eps, "Comma separated radii");
  sweep->add_option("--scenario", sweep_scenario, "Use this scenario file for every repetition");
  sweep->add_option("--out-dir", sweep_cfg.out_dir, "Directory for metrics.csv, metrics_long.csv, summary.json");
  sweep->add_option("--solver", sweep_cfg.solver_name, "proximal | best-response")
      ->check(CLI::IsMember({"proximal", "best-response"}));
  sweep->add_option("--reps", sweep_cfg.repetitions, "Repetitions")->check(CLI::PositiveNumber);
  sweep->add_option("--scale", sweep_scale, "Multiplier on the repetition count")->check(CLI::PositiveNumber);
  sweep->add_option("--cross-scale", sweep_cfg.cross_scale, "Multiplier on every cross gain")
      ->check(CLI::PositiveNumber);
  sweep->add_flag("!--absolute", sweep_cfg.relative, "Absolute instead of relative radii");

  std::string jp_eps = "0,0.2,0.4,0.6,0.8";
  std::uint64_t jp_seed = 1;
  int jp_reps = 50;
  double jp_scale = 1.0;
  std::string jp_out;
  auto* jp = app.add_subcommand("jackson-prob", "Convergence probability table for Jackson networks");
  jp->add_option("--eps-list", jp_eps, "Comma separated radii");
  jp->add_option("--seed", jp_seed, "First seed");
  jp->add_option("--reps", jp_reps, "Seeds per cell")->check(CLI::PositiveNumber);
  jp->add_option("--scale", jp_scale, "Multiplier on the seed count")->check(CLI::PositiveNumber);
  jp->add_option("--out-dir", jp_out, "Directory for convergence_probability.csv");

  auto* cp = app.add_subcommand("checkpoints", "Recompute the published two-user example; exit 2 on failure");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(gen_opts, gen_out);
    if (*analyze) return cmd_analyze(an_opts);
    if (*solve) return cmd_solve(solve_opts, solver, eps, !absolute, trace_out, max_iter, tol);
    if (*sweep) {
      sweep_cfg.power.regime = regime_from_name(sweep_regime);
      return cmd_sweep(sweep_cfg, sweep_eps, sweep_scenario, sweep_scale);
    }
    if (*jp) return cmd_jackson_prob(jp_eps, jp_seed, jp_reps, jp_scale, jp_out);
    if (*cp) return cmd_checkpoints();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
