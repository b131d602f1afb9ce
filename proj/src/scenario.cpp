#include "mas/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace mas {

using nlohmann::json;

namespace {

VertexId parse_start(const Environment& env, const json& start, const std::string& agent) {
  if (start.is_array()) {
    if (!env.is_grid() || start.size() != 2) {
      throw ConfigError("agent " + agent + ": [x,y] starts require a grid environment");
    }
    return env.vertex_at(start[0].get<int>(), start[1].get<int>());
  }
  if (start.is_string()) {
    auto v = env.find_vertex(start.get<std::string>());
    if (!v) throw ConfigError("agent " + agent + ": unknown start vertex " + start.dump());
    return *v;
  }
  throw ConfigError("agent " + agent + ": start must be [x,y] or a vertex name");
}

}  // namespace

SimConfig load_scenario_json(const json& j, const std::string& base_dir) {
  SimConfig config;
  if (j.contains("grid")) {
    GridSpec spec{j["grid"].value("width", 0), j["grid"].value("height", 0)};
    config.env = std::make_shared<Environment>(Environment::grid(spec));
  } else if (j.contains("graph_file")) {
    std::filesystem::path p = j["graph_file"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    config.env = std::make_shared<Environment>(Environment::from_edge_list_file(p.string()));
  } else if (j.contains("graph")) {
    std::ostringstream edges;
    for (const auto& e : j["graph"]["edges"]) {
      edges << e[0].get<std::string>() << ' ' << e[1].get<std::string>() << ' '
            << e[2].get<std::string>() << '\n';
    }
    std::istringstream in(edges.str());
    config.env = std::make_shared<Environment>(Environment::from_edge_list(in));
  } else {
    throw ConfigError("scenario needs `grid`, `graph_file`, or `graph`");
  }

  config.lookahead = j.value("lookahead", 3);
  config.deviation_k = j.value("deviation", 2);
  config.comm_dist = j.value("comm_dist", -1);
  config.safety_name = j.value("safety", std::string("collision"));
  config.seed = j.value("seed", std::uint64_t{0});
  config.max_ticks = j.value("max_ticks", 10000);
  config.parallel_groups = j.value("parallel_groups", false);
  config.randomized_fallback = j.value("randomized_fallback", false);

  if (j.contains("agents")) {
    std::mt19937_64 plan_rng(config.seed);
    for (const auto& a : j["agents"]) {
      AgentSpec spec;
      spec.name = a.value("id", std::string());
      if (spec.name.empty()) throw ConfigError("agent without id");
      spec.start = parse_start(*config.env, a.at("start"), spec.name);
      if (!a.contains("plan")) {
        throw ConfigError("agent " + spec.name + ": missing plan");
      }
      if (a["plan"].is_string()) {
        spec.plan = a["plan"].get<std::string>();
      } else if (a["plan"].is_object() && a["plan"].contains("random_length")) {
        int len = a["plan"]["random_length"].get<int>();
        VertexId v = spec.start;
        for (int s = 0; s < len; ++s) {
          auto edges = config.env->edges_from(v);
          const auto& e = edges[static_cast<size_t>(plan_rng() % edges.size())];
          spec.plan.push_back(e.action);
          v = e.to;
        }
      } else {
        throw ConfigError("agent " + spec.name + ": plan must be a string or {random_length}");
      }
      config.agents.push_back(std::move(spec));
    }
  } else if (j.contains("random_agents")) {
    const auto& r = j["random_agents"];
    config.agents = gen_random_plans(config.seed, *config.env, r.at("count").get<int>(),
                                     r.at("plan_length").get<int>(), config.lookahead,
                                     r.value("clearable_goals", false));
  } else {
    throw ConfigError("scenario needs `agents` or `random_agents`");
  }
  return config;
}

SimConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario parse error in " + path + ": " + e.what());
  }
  return load_scenario_json(j, std::filesystem::path(path).parent_path().string());
}

json scenario_to_json(const SimConfig& config) {
  json j;
  const Environment& env = *config.env;
  if (env.is_grid()) {
    j["grid"] = {{"width", env.width()}, {"height", env.height()}};
  } else {
    json edges = json::array();
    for (VertexId v = 0; v < env.vertex_count(); ++v) {
      for (const auto& e : env.edges_from(v)) {
        edges.push_back({env.vertex_name(v), std::string(1, e.action), env.vertex_name(e.to)});
      }
    }
    j["graph"] = {{"edges", edges}};
  }
  j["lookahead"] = config.lookahead;
  j["deviation"] = config.deviation_k;
  j["comm_dist"] = config.resolved_comm_dist();
  j["safety"] = config.safety_name;
  j["seed"] = config.seed;
  j["max_ticks"] = config.max_ticks;
  if (config.parallel_groups) j["parallel_groups"] = true;
  if (config.randomized_fallback) j["randomized_fallback"] = true;
  json agents = json::array();
  for (const AgentSpec& a : config.agents) {
    json spec;
    spec["id"] = a.name;
    if (env.is_grid()) {
      auto [x, y] = env.coords(a.start);
      spec["start"] = {x, y};
    } else {
      spec["start"] = env.vertex_name(a.start);
    }
    spec["plan"] = a.plan;
    agents.push_back(std::move(spec));
  }
  j["agents"] = std::move(agents);
  return j;
}

}  // namespace mas
