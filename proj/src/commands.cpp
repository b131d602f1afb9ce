#include "mas/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mas/oracle.hpp"
#include "mas/scenario.hpp"
#include "mas/trace.hpp"

namespace mas {

namespace {

GridSpec parse_grid_flag(const std::string& wxh) {
  auto x = wxh.find('x');
  if (x == std::string::npos) throw ConfigError("--grid expects WxH, e.g. 20x20");
  return {std::stoi(wxh.substr(0, x)), std::stoi(wxh.substr(x + 1))};
}

SimConfig build_config(const RunOptions& opts) {
  SimConfig config;
  if (!opts.scenario_path.empty()) {
    config = load_scenario_file(opts.scenario_path);
  } else {
    if (!opts.grid || !opts.agents) {
      throw ConfigError("either --scenario or both --grid and --agents are required");
    }
    config.env = std::make_shared<Environment>(Environment::grid(parse_grid_flag(*opts.grid)));
  }
  if (opts.seed) config.seed = *opts.seed;
  if (opts.lookahead) config.lookahead = *opts.lookahead;
  if (opts.deviation) config.deviation_k = *opts.deviation;
  if (opts.comm_dist) config.comm_dist = *opts.comm_dist;
  if (opts.max_ticks) config.max_ticks = *opts.max_ticks;
  config.parallel_groups = config.parallel_groups || opts.parallel_groups;
  if (config.agents.empty()) {
    int count = opts.agents.value_or(0);
    if (count <= 0) throw ConfigError("no agents in scenario and no --agents count given");
    int length = opts.plan_length.value_or(2 * config.lookahead);
    config.agents =
        gen_random_plans(config.seed, *config.env, count, length, config.lookahead, true);
  }
  return config;
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  SimConfig config;
  try {
    config = build_config(opts);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  RunResult result;
  try {
    Simulator sim(config);
    result = sim.run();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (!opts.trace_path.empty()) {
    std::ofstream trace(opts.trace_path);
    if (!trace) {
      err << "error: cannot write trace to " << opts.trace_path << '\n';
      return kExitConfig;
    }
    write_trace(trace, config, result);
  }
  if (!opts.metrics_path.empty()) {
    std::ofstream metrics(opts.metrics_path);
    if (!metrics) {
      err << "error: cannot write metrics to " << opts.metrics_path << '\n';
      return kExitConfig;
    }
    metrics << metrics_to_json(config, result).dump(2) << '\n';
  }

  out << "status: " << to_string(result.status) << ", ticks: " << result.ticks
      << ", pathfinder calls: " << result.metrics.total_pathfinder_calls
      << ", max block deviation: " << result.metrics.max_block_deviation << " (bound "
      << result.metrics.deviation_bound << ")\n";
  for (size_t i = 0; i < config.agents.size(); ++i) {
    out << "  " << config.agents[i].name << ": deviation " << result.metrics.deviation[i]
        << ", calls " << result.metrics.pathfinder_calls[i] << ", escapes "
        << result.metrics.escape_count[i] << '\n';
  }
  if (result.status == RunStatus::Aborted) {
    err << "abort: " << result.abort_reason << '\n';
    return kExitAbort;
  }
  return kExitOk;
}

int cmd_validate(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
  SimConfig config;
  try {
    config = load_scenario_file(scenario_path);
  } catch (const std::exception& e) {
    err << "invalid: " << e.what() << '\n';
    return kExitConfig;
  }
  int warnings = 0;
  try {
    Simulator sim(config);  // validates starts, plans, parameters, start safety
  } catch (const std::exception& e) {
    err << "invalid: " << e.what() << '\n';
    return kExitConfig;
  }
  const Environment& env = *config.env;
  out << "environment: " << (env.is_grid() ? "grid" : "graph") << ", " << env.vertex_count()
      << " vertices\n";
  if (!env.two_edge_connected()) {
    out << "warning: environment is not 2-edge-connected; the escape fallback may dead-end\n";
    ++warnings;
  }
  const int d = config.resolved_comm_dist();
  const int ell = config.lookahead;
  const int k = config.deviation_k;
  if (!(ell <= k && k < d)) {
    out << "warning: parameters do not satisfy lookahead <= k < comm_dist (" << ell << ", " << k
        << ", " << d << ")\n";
    ++warnings;
  }
  if (d < 2) {
    out << "warning: comm_dist < 2 cannot always detect head-on collisions in time\n";
    ++warnings;
  }
  SafetyFn phi = SafetyFn::parse(config.safety_name, env);
  if (phi.min_separation() > 0 && d < phi.min_separation() + 2) {
    out << "warning: comm_dist < min separation + 2; violations may go undetected\n";
    ++warnings;
  }
  out << "agents: " << config.agents.size() << ", safety: " << config.safety_name << "\n";
  out << "ok (" << warnings << " warning" << (warnings == 1 ? "" : "s") << ")\n";
  return kExitOk;
}

int cmd_replay(const std::string& trace_path, std::ostream& out, std::ostream& err) {
  std::ifstream in(trace_path);
  if (!in) {
    err << "error: cannot open trace " << trace_path << '\n';
    return kExitConfig;
  }
  ReplaySummary summary = replay_trace(in);
  if (!summary.ok) {
    err << "replay failed: " << summary.error << '\n';
    return kExitAbort;
  }
  out << "replay ok: " << summary.records << " records, last tick " << summary.ticks << '\n';
  for (const auto& [name, dev] : summary.deviation) {
    out << "  " << name << ": deviation " << dev << '\n';
  }
  return kExitOk;
}

int cmd_plot(const std::string& trace_path, const std::string& out_dir, std::ostream& out,
             std::ostream& err) {
  std::ifstream in(trace_path);
  if (!in) {
    err << "error: cannot open trace " << trace_path << '\n';
    return kExitConfig;
  }
  std::string line;
  nlohmann::json header;
  if (!std::getline(in, line)) {
    err << "error: empty trace\n";
    return kExitConfig;
  }
  SimConfig config;
  try {
    header = nlohmann::json::parse(line);
    config = load_scenario_json(header.at("config"), "");
  } catch (const std::exception& e) {
    err << "error: bad trace header: " << e.what() << '\n';
    return kExitConfig;
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::ofstream> files;
  for (const AgentSpec& a : config.agents) {
    files.emplace_back(std::filesystem::path(out_dir) / (a.name + ".csv"));
    files.back() << (config.env->is_grid() ? "tick,x,y\n" : "tick,vertex\n");
  }
  while (std::getline(in, line)) {
    auto rec = nlohmann::json::parse(line);
    if (rec.value("type", "") != "step") continue;
    int tick = rec.value("tick", 0);
    for (size_t i = 0; i < config.agents.size(); ++i) {
      const auto& p = rec["positions"][config.agents[i].name];
      if (p.is_array()) {
        files[i] << tick << ',' << p[0].get<int>() << ',' << p[1].get<int>() << '\n';
      } else {
        files[i] << tick << ',' << p.get<std::string>() << '\n';
      }
    }
  }
  out << "wrote " << config.agents.size() << " csv files to " << out_dir << '\n';
  return kExitOk;
}

BenchRow bench_row(int agents, int grid_side, int lookahead, int k, std::uint64_t seed) {
  SimConfig config;
  config.env = std::make_shared<Environment>(Environment::grid({grid_side, grid_side}));
  config.lookahead = lookahead;
  config.deviation_k = k;
  config.seed = seed;
  config.max_ticks = std::max(8, 4 * (lookahead + k));

  // Pack the agents around the grid center and point every plan at the
  // center cell: one communication group, immediate conflicts.
  const Environment& env = *config.env;
  const int cx = grid_side / 2, cy = grid_side / 2;
  std::vector<std::pair<int, VertexId>> ranked;
  for (VertexId v = 0; v < env.vertex_count(); ++v) {
    auto [x, y] = env.coords(v);
    ranked.emplace_back(std::abs(x - cx) + std::abs(y - cy), v);
  }
  std::sort(ranked.begin(), ranked.end());
  for (int i = 0; i < agents; ++i) {
    VertexId start = ranked[static_cast<size_t>(i)].second;
    auto [x, y] = env.coords(start);
    std::string plan;
    for (; x < cx; ++x) plan.push_back('r');
    for (; x > cx; --x) plan.push_back('l');
    for (; y < cy; ++y) plan.push_back('t');
    for (; y > cy; --y) plan.push_back('d');
    if (plan.empty()) plan = "s";
    config.agents.push_back({"a" + std::to_string(i), start, plan});
  }

  Simulator sim(config);
  RunResult result = sim.run();

  BenchRow row;
  row.agents = agents;
  row.grid_side = grid_side;
  row.lookahead = lookahead;
  row.k = k;
  row.reservation_max = result.metrics.max_future_reservations;
  row.expected_reservation = (lookahead + k) * agents;
  row.single_group =
      !result.trace.empty() && result.trace.front().groups.size() == 1;
  if (!result.metrics.call_wall_ns.empty()) {
    auto sorted = result.metrics.call_wall_ns;
    std::sort(sorted.begin(), sorted.end());
    row.best_ns = sorted.front();
    row.worst_ns = sorted.back();
    row.median_ns = sorted[sorted.size() / 2];
  }
  return row;
}

std::vector<BenchRow> bench_default_rows() {
  // (agents, grid, lookahead, k) following the scalability study's grid.
  const int specs[][4] = {{3, 3, 3, 3},   {3, 3, 5, 5},   {3, 3, 10, 5},  {3, 5, 5, 5},
                          {3, 10, 5, 5},  {3, 50, 5, 5},  {5, 3, 5, 5},   {5, 5, 5, 5},
                          {5, 10, 5, 5},  {20, 50, 3, 3}, {20, 50, 5, 5}, {20, 50, 10, 5},
                          {30, 50, 10, 5}, {40, 50, 10, 5}, {50, 50, 10, 5}, {60, 50, 10, 5}};
  std::vector<BenchRow> rows;
  for (const auto& s : specs) rows.push_back(bench_row(s[0], s[1], s[2], s[3]));
  return rows;
}

int cmd_bench(std::ostream& out, std::ostream& err) {
  (void)err;
  out << "agents  states  lookahead  k  reservations  expected  best(ms)  worst(ms)\n";
  for (const BenchRow& row : bench_default_rows()) {
    out << row.agents << "  " << row.grid_side << "^2  " << row.lookahead << "  " << row.k << "  "
        << row.reservation_max << "  " << row.expected_reservation << "  "
        << static_cast<double>(row.best_ns) / 1e6 << "  "
        << static_cast<double>(row.worst_ns) / 1e6
        << (row.reservation_max == row.expected_reservation && row.single_group ? "" : "  [!]")
        << '\n';
  }
  return kExitOk;
}

}  // namespace mas
