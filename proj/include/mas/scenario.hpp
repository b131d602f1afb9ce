#pragma once

#include <string>

#include <json.hpp>

#include "mas/simulator.hpp"

namespace mas {

/// Scenario file loading. Grid scenarios carry {"grid":{"width","height"}};
/// custom graphs either reference an edge-list file ("graph_file", relative to
/// the scenario) or embed the list ("graph": {"edges": [[src, act, dst],...]}).
/// Agents are listed explicitly (plans as action strings or
/// {"random_length": n}) or generated wholesale via
/// {"random_agents": {"count", "plan_length", "clearable_goals"}}.
SimConfig load_scenario_json(const nlohmann::json& j, const std::string& base_dir);
SimConfig load_scenario_file(const std::string& path);

/// Canonical echo with every agent resolved; embeds custom graphs so traces
/// replay without the original file. load_scenario_json(echo) round-trips.
nlohmann::json scenario_to_json(const SimConfig& config);

}  // namespace mas
