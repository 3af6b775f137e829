#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "racg/experiment.hpp"
#include "racg/scenario_io.hpp"

using namespace racg;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_power(std::vector<double> eps, int reps = 3) {
  ExperimentConfig c;
  c.kind = "power";
  c.repetitions = reps;
  c.eps_list = std::move(eps);
  c.solver.tolerance = 1e-9;
  c.solver.record_history = false;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("racg_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Experiment, ZeroRadiusRatioIsOne) {
  for (const MetricsRecord& r : run_experiment(small_power({0.0}))) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_NEAR(r.ratio, 1.0, 1e-12);
    EXPECT_NEAR(r.distance, 0.0, 1e-12);
  }
}

TEST(Experiment, UniqueRegimeRatioAtMostOne) {
  const auto records = run_experiment(small_power({0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, 5));
  EXPECT_EQ(records.size(), 30u);
  for (const MetricsRecord& r : records) {
    EXPECT_LE(r.ratio, 1.0 + 1e-9);
    EXPECT_FALSE(r.config_hash.empty());
  }
}

TEST(Experiment, RecordsSortedAndSeeded) {
  const auto records = run_experiment(small_power({0.3, 0.1}, 2));
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    EXPECT_TRUE(std::tie(a.repetition, a.solver, a.eps) <= std::tie(b.repetition, b.solver, b.eps));
  }
  EXPECT_NE(records.front().seed, records.back().seed);
}

TEST(Experiment, ReplayIsByteIdentical) {
  ExperimentConfig c = small_power({0.2}, 2);
  c.out_dir = fresh_dir("replay_a").string();
  run_experiment(c);
  const std::string first = slurp(fs::path(c.out_dir) / "metrics.csv");
  c.out_dir = fresh_dir("replay_b").string();
  run_experiment(c);
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, slurp(fs::path(c.out_dir) / "metrics.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "metrics_long.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "summary.json"));
}

TEST(Experiment, HashTracksConfig) {
  ExperimentConfig a = small_power({0.1});
  ExperimentConfig b = a;
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.seed = 2;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Experiment, InvalidConfigRejected) {
  ExperimentConfig c = small_power({});
  EXPECT_THROW(c.validate(), InfeasibleError);
  c = small_power({-0.1});
  EXPECT_THROW(c.validate(), InfeasibleError);
  c = small_power({0.1});
  c.kind = "other";
  EXPECT_THROW(c.validate(), InfeasibleError);
}

TEST(Experiment, CsvHeaderMatchesRows) {
  const auto records = run_experiment(small_power({0.1}, 1));
  std::ostringstream out;
  write_metrics_csv(out, records);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  const auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(commas(header) + 1, static_cast<long>(metrics_csv_header().size()));
  EXPECT_EQ(commas(header), commas(row));
}

TEST(Experiment, JacksonRecordsDelay) {
  ExperimentConfig c;
  c.kind = "jackson";
  c.repetitions = 1;
  c.eps_list = {0.2};
  c.perturbed_iterations = 200;
  c.solver.record_history = false;
  const auto records = run_experiment(c);
  ASSERT_EQ(records.size(), 3u);
  for (const MetricsRecord& r : records) EXPECT_FALSE(std::isnan(r.delay_excess));
}

TEST(ConvergenceProbability, DecoupledZeroRadiusAlwaysConverges) {
  ConvergenceSweep s;
  s.routing_grid = {0.0};
  s.eps_list = {0.0};
  s.seeds = {1, 2, 3, 4, 5};
  const auto cells = convergence_probability(s);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].probability, 1.0);
  EXPECT_EQ(cells[0].runs, 5);
}

TEST(ConvergenceProbability, NonincreasingInRadius) {
  ConvergenceSweep s;
  s.params.min_rate_lo = 0.3;
  s.params.min_rate_hi = 0.9;
  s.routing_grid = {0.6};
  s.solver.tolerance = 1e-8;
  s.solver.max_iterations = 50000;
  for (std::uint64_t i = 1; i <= 10; ++i) s.seeds.push_back(i);
  const auto cells = convergence_probability(s);
  int inversions = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) inversions += cells[i].probability > cells[i - 1].probability;
  EXPECT_LE(inversions, 1);
}

TEST(ConvergenceProbability, EmptySeedsRejected) {
  EXPECT_THROW(convergence_probability(ConvergenceSweep{}), InfeasibleError);
}

TEST(Checkpoints, PublishedExample) {
  const auto cps = reference_checkpoints();
  ASSERT_GE(cps.size(), 3u);
  EXPECT_NEAR(cps[0].value, 0.7211, 5e-4);
  EXPECT_TRUE(cps[1].passed);
  EXPECT_TRUE(cps[2].passed);
  EXPECT_TRUE(checkpoints_passed(cps));
}

TEST(ScenarioIo, PowerRoundTrip) {
  PowerScenarioParams p;
  p.regime = Regime::kHigh;
  const PowerControlScenario s = generate_power_scenario(p, 11);
  const auto back = std::get<PowerControlScenario>(scenario_from_json(to_json(s)));
  for (int k = 0; k < s.dims; ++k) EXPECT_EQ(back.gain[k], s.gain[k]);
  EXPECT_EQ(back.noise, s.noise);
  EXPECT_EQ(back.power_max, s.power_max);
}

TEST(ScenarioIo, JacksonFileRoundTrip) {
  const JacksonScenario s = generate_jackson_scenario(JacksonScenarioParams{}, 12);
  const fs::path path = fresh_dir("io") / "scenario.json";
  fs::create_directories(path.parent_path());
  save_scenario(path.string(), s);
  const auto back = std::get<JacksonScenario>(load_scenario(path.string()));
  for (int k = 0; k < s.classes; ++k) EXPECT_EQ(back.routing[k], s.routing[k]);
  EXPECT_EQ(back.service_rate, s.service_rate);
  EXPECT_EQ(back.rate_cap, s.rate_cap);
}

TEST(ScenarioIo, VersionChecked) {
  nlohmann::json j = to_json(generate_power_scenario(PowerScenarioParams{}, 1));
  j.erase("version");
  EXPECT_THROW(scenario_from_json(j), InfeasibleError);
  j["version"] = kScenarioVersion + 1;
  EXPECT_THROW(scenario_from_json(j), InfeasibleError);
}
