#include "mas/trace.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

#include "mas/scenario.hpp"

namespace mas {

using nlohmann::json;

namespace {

json position_json(const Environment& env, VertexId v) {
  if (env.is_grid()) {
    auto [x, y] = env.coords(v);
    return json::array({x, y});
  }
  return env.vertex_name(v);
}

json event_json(const SimConfig& config, const Event& event) {
  const auto& name = [&](AgentId a) { return config.agents[static_cast<size_t>(a)].name; };
  json j;
  if (const auto* e = std::get_if<GoalEvent>(&event)) {
    j = {{"kind", "goal"}, {"agent", name(e->agent)}};
  } else if (const auto* e = std::get_if<BlockAdvanceEvent>(&event)) {
    j = {{"kind", "block"}, {"agent", name(e->agent)}, {"index", e->block_index}};
  } else if (const auto* e = std::get_if<ReplanEvent>(&event)) {
    j = {{"kind", "replan"},     {"agent", name(e->agent)},
         {"result", to_string(e->result)}, {"cause", e->repair ? "repair" : "violation"},
         {"old", e->old_word},   {"new", e->new_word},
         {"expanded", e->expanded}, {"reserved", e->reserved}};
  } else if (const auto* e = std::get_if<ForcedEvent>(&event)) {
    j = {{"kind", "forced"}, {"agent", name(e->agent)}, {"action", std::string(1, e->action)}};
  } else if (const auto* e = std::get_if<FlagSetEvent>(&event)) {
    j = {{"kind", "flag_set"}, {"owner", name(e->owner)}, {"other", name(e->other)}};
  } else if (const auto* e = std::get_if<FlagResetEvent>(&event)) {
    j = {{"kind", "flag_reset"}, {"a", name(e->a)}, {"b", name(e->b)}};
  } else if (const auto* e = std::get_if<DiagnosticEvent>(&event)) {
    j = {{"kind", "diag"}, {"message", e->message}};
  }
  return j;
}

}  // namespace

void write_trace(std::ostream& out, const SimConfig& config, const RunResult& result) {
  const Environment& env = *config.env;
  json header = {{"type", "header"}, {"version", kToolVersion}, {"config", scenario_to_json(config)}};
  out << header.dump() << '\n';
  for (const StepRecord& rec : result.trace) {
    json positions = json::object();
    json acts = json::object();
    for (size_t i = 0; i < rec.positions.size(); ++i) {
      positions[config.agents[i].name] = position_json(env, rec.positions[i]);
      if (!rec.acts.empty()) acts[config.agents[i].name] = std::string(1, rec.acts[i]);
    }
    json groups = json::array();
    for (const auto& g : rec.groups) {
      json members = json::array();
      for (AgentId a : g) members.push_back(config.agents[static_cast<size_t>(a)].name);
      groups.push_back(std::move(members));
    }
    json events = json::array();
    for (const Event& e : rec.events) events.push_back(event_json(config, e));
    json step = {{"type", "step"},   {"tick", rec.tick}, {"positions", std::move(positions)},
                 {"acts", std::move(acts)}, {"groups", std::move(groups)},
                 {"events", std::move(events)}};
    out << step.dump() << '\n';
  }
  json end = {{"type", "end"},
              {"status", to_string(result.status)},
              {"ticks", result.ticks},
              {"reason", result.abort_reason}};
  out << end.dump() << '\n';
}

json metrics_to_json(const SimConfig& config, const RunResult& result) {
  const Metrics& m = result.metrics;
  json agents = json::object();
  for (size_t i = 0; i < config.agents.size(); ++i) {
    json blocks = json::array();
    for (const BlockStat& b : m.blocks) {
      if (b.agent != static_cast<AgentId>(i)) continue;
      blocks.push_back({{"index", b.block_index},
                        {"len", b.original_len},
                        {"activated", b.activated_tick},
                        {"completed", b.completed_tick}});
    }
    agents[config.agents[i].name] = {{"deviation", m.deviation[i]},
                                     {"pathfinder_calls", m.pathfinder_calls[i]},
                                     {"escapes", m.escape_count[i]},
                                     {"blocks", std::move(blocks)}};
  }
  json walls = json::object();
  if (!m.call_wall_ns.empty()) {
    auto sorted = m.call_wall_ns;
    std::sort(sorted.begin(), sorted.end());
    walls = {{"best_ns", sorted.front()},
             {"worst_ns", sorted.back()},
             {"median_ns", sorted[sorted.size() / 2]},
             {"calls", sorted.size()}};
  }
  json rounds = json::array();
  for (const RoundStat& r : m.rounds) {
    rounds.push_back({{"wall_ns", r.wall_ns}, {"group_size", r.group_size}, {"calls", r.calls}});
  }
  json calls = json::array();
  for (const CallStat& cs : m.calls) {
    calls.push_back({{"tick", cs.tick},
                     {"agent", config.agents[static_cast<size_t>(cs.agent)].name},
                     {"result", to_string(cs.result)},
                     {"expanded", cs.expanded},
                     {"reserved", cs.reserved},
                     {"wall_ns", cs.wall_ns}});
  }
  return json{{"agents", std::move(agents)},
              {"global",
               {{"status", to_string(result.status)},
                {"reason", result.abort_reason},
                {"ticks", result.ticks},
                {"max_block_deviation", m.max_block_deviation},
                {"deviation_bound", m.deviation_bound},
                {"pathfinder_calls", m.total_pathfinder_calls},
                {"reservation_max", m.max_future_reservations},
                {"pathfind_wall", std::move(walls)},
                {"calls", std::move(calls)},
                {"rounds", std::move(rounds)}}}};
}

ReplaySummary replay_trace(std::istream& in) {
  ReplaySummary summary;
  std::string line;
  if (!std::getline(in, line)) {
    // An empty trace re-checks vacuously.
    summary.ok = true;
    return summary;
  }
  json header;
  SimConfig config;
  try {
    header = json::parse(line);
    if (header.value("type", "") != "header") throw ConfigError("first record is not a header");
    config = load_scenario_json(header.at("config"), "");
  } catch (const std::exception& e) {
    summary.error = std::string("bad header: ") + e.what();
    return summary;
  }
  const Environment& env = *config.env;
  SafetyFn phi = SafetyFn::parse(config.safety_name, env);
  const size_t n = config.agents.size();
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < n; ++i) index[config.agents[i].name] = i;

  auto parse_pos = [&](const json& p) -> VertexId {
    if (p.is_array()) return env.vertex_at(p[0].get<int>(), p[1].get<int>());
    auto v = env.find_vertex(p.get<std::string>());
    if (!v) throw ConfigError("unknown vertex in trace: " + p.dump());
    return *v;
  };

  // Deviation accounting from goal events: completion tick minus activation
  // tick minus the original block length, per block per agent.
  std::vector<std::vector<std::string>> blocks(n);
  std::vector<size_t> block_at(n, 0);
  std::vector<int> activated(n, 0), deviation(n, 0);
  for (size_t i = 0; i < n; ++i) blocks[i] = split_blocks(config.agents[i].plan, config.lookahead);

  std::vector<VertexId> prev_pos, expected;
  std::string prev_acts;
  int records = 0;
  while (std::getline(in, line)) {
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      summary.error = std::string("trace parse error: ") + e.what();
      return summary;
    }
    const std::string type = rec.value("type", "");
    if (type == "end") break;
    if (type != "step") continue;
    ++records;
    int tick = rec.value("tick", -1);

    std::vector<VertexId> pos(n);
    try {
      for (size_t i = 0; i < n; ++i) pos[i] = parse_pos(rec.at("positions").at(config.agents[i].name));
    } catch (const std::exception& e) {
      summary.error = "tick " + std::to_string(tick) + ": bad positions: " + e.what();
      return summary;
    }

    // Recorded actions must reproduce the next record's positions.
    if (!prev_pos.empty() && !prev_acts.empty()) {
      for (size_t i = 0; i < n; ++i) {
        auto to = env.try_step(prev_pos[i], prev_acts[i]);
        if (!to || *to != pos[i]) {
          summary.error = "tick " + std::to_string(tick) + ": positions do not follow from acts";
          return summary;
        }
      }
    }

    Occupancy occ = Occupancy::from_positions(pos);
    auto bad = phi.check(occ);
    if (!bad && !prev_pos.empty()) {
      bad = phi.check_transition(Occupancy::from_positions(prev_pos), occ);
    }
    if (bad) {
      summary.error = "tick " + std::to_string(tick) + ": safety (" + phi.name() +
                      ") violated at vertex " + env.vertex_name(bad->vertex);
      return summary;
    }

    for (const auto& ev : rec.value("events", json::array())) {
      if (ev.value("kind", "") != "goal") continue;
      size_t i = index.at(ev.at("agent").get<std::string>());
      if (block_at[i] < blocks[i].size()) {
        deviation[i] += (tick - activated[i]) - static_cast<int>(blocks[i][block_at[i]].size());
        activated[i] = tick;
        block_at[i] += 1;
      }
    }

    prev_pos = pos;
    prev_acts.clear();
    if (rec.contains("acts") && !rec["acts"].empty()) {
      prev_acts.resize(n, 's');
      for (size_t i = 0; i < n; ++i) {
        auto it = rec["acts"].find(config.agents[i].name);
        if (it != rec["acts"].end()) prev_acts[i] = it->get<std::string>()[0];
      }
    }
    summary.ticks = tick;
  }
  summary.records = records;
  for (size_t i = 0; i < n; ++i) summary.deviation.emplace_back(config.agents[i].name, deviation[i]);
  summary.ok = true;
  return summary;
}

}  // namespace mas
