#include "racg/scenario_io.hpp"

#include <fstream>

namespace racg {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw InfeasibleError("expected a matrix");
  const int r = static_cast<int>(j.size());
  const int c = static_cast<int>(j[0].size());
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != c) throw InfeasibleError("ragged matrix");
    for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

namespace {

json vector_to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json stack_to_json(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> stack_from_json(const json& j) {
  std::vector<Matrix> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

}  // namespace

json to_json(const PowerControlScenario& s) {
  return {{"version", kScenarioVersion},
          {"kind", "power"},
          {"players", s.players},
          {"dims", s.dims},
          {"gain", stack_to_json(s.gain)},
          {"noise", matrix_to_json(s.noise)},
          {"power_max", vector_to_json(s.power_max)},
          {"power_cap", matrix_to_json(s.power_cap)},
          {"regime", regime_name(s.regime)},
          {"seed", s.seed}};
}

json to_json(const JacksonScenario& s) {
  return {{"version", kScenarioVersion},
          {"kind", "jackson"},
          {"nodes", s.nodes},
          {"classes", s.classes},
          {"routing", stack_to_json(s.routing)},
          {"service_rate", matrix_to_json(s.service_rate)},
          {"min_rate", vector_to_json(s.min_rate)},
          {"rate_cap", matrix_to_json(s.rate_cap)},
          {"seed", s.seed}};
}

json to_json(const Scenario& s) {
  return std::visit([](const auto& v) { return to_json(v); }, s);
}

Scenario scenario_from_json(const json& j) {
  try {
    if (!j.contains("version")) throw InfeasibleError("scenario file lacks the version field");
    if (j.at("version").get<int>() != kScenarioVersion) {
      throw InfeasibleError("unsupported scenario version " + j.at("version").dump());
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "power") {
      PowerControlScenario s;
      s.players = j.at("players").get<int>();
      s.dims = j.at("dims").get<int>();
      s.gain = stack_from_json(j.at("gain"));
      s.noise = matrix_from_json(j.at("noise"));
      s.power_max = vector_from_json(j.at("power_max"));
      s.power_cap = matrix_from_json(j.at("power_cap"));
      s.regime = regime_from_name(j.value("regime", std::string("custom")));
      s.seed = j.value("seed", std::uint64_t{0});
      s.validate();
      return s;
    }
    if (kind == "jackson") {
      JacksonScenario s;
      s.nodes = j.at("nodes").get<int>();
      s.classes = j.at("classes").get<int>();
      s.routing = stack_from_json(j.at("routing"));
      s.service_rate = matrix_from_json(j.at("service_rate"));
      s.min_rate = vector_from_json(j.at("min_rate"));
      s.rate_cap = matrix_from_json(j.at("rate_cap"));
      s.seed = j.value("seed", std::uint64_t{0});
      s.validate();
      return s;
    }
    throw InfeasibleError("unknown scenario kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw InfeasibleError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InfeasibleError(std::string("scenario file is not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write scenario file " + path);
  out << to_json(s).dump(2) << '\n';
}

json trace_to_json(const RunTrace& trace) {
  json profiles = json::array();
  for (const auto& p : trace.profiles) profiles.push_back(matrix_to_json(p));
  json utilities = json::array();
  for (const auto& u : trace.utilities) utilities.push_back(vector_to_json(u));
  json out = {{"iterations", trace.iterations},
              {"converged", trace.converged},
              {"step_norms", trace.step_norms},
              {"profiles", profiles},
              {"utilities", utilities},
              {"inner_failures", trace.inner_failures}};
  if (trace.preconditions) {
    out["preconditions"] = {{"p_matrix", trace.preconditions->p_matrix},
                            {"third_partials_vanish", trace.preconditions->third_partials_vanish}};
  }
  return out;
}

}  // namespace racg
