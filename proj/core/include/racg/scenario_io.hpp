#pragma once

#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "racg/models.hpp"
#include "racg/solvers.hpp"

namespace racg {

inline constexpr int kScenarioVersion = 1;

using Scenario = std::variant<PowerControlScenario, JacksonScenario>;

nlohmann::json to_json(const PowerControlScenario& s);
nlohmann::json to_json(const JacksonScenario& s);
nlohmann::json to_json(const Scenario& s);
// Throws InfeasibleError on a missing/unsupported version or malformed fields.
Scenario scenario_from_json(const nlohmann::json& j);

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& s);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const RunTrace& trace);

}  // namespace racg
