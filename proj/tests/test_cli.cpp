#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mas/commands.hpp"
#include "mas/scenario.hpp"
#include "mas/trace.hpp"

using namespace mas;

namespace {

const std::string kScenarioDir = MAS_SCENARIO_DIR;
const std::string kGoldenDir = MAS_GOLDEN_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("scenario loading and echo round-trip") {
  SimConfig config = load_scenario_file(kScenarioDir + "/fig1.json");
  CHECK(config.lookahead == 3);
  CHECK(config.deviation_k == 2);
  CHECK(config.resolved_comm_dist() == 4);
  REQUIRE(config.agents.size() == 2);
  CHECK(config.agents[0].name == "blue");
  CHECK(config.agents[0].start == config.env->vertex_at(4, 2));

  auto echo = scenario_to_json(config);
  SimConfig back = load_scenario_json(echo, "");
  CHECK(back.agents == std::vector<AgentSpec>{config.agents[0], config.agents[1]});
  CHECK(back.env->vertex_count() == config.env->vertex_count());
}

TEST_CASE("cmd_run on the bundled scenarios") {
  std::string trace = tmp_path("mas_fig1_trace.jsonl");
  std::string metrics = tmp_path("mas_fig1_metrics.json");
  RunOptions opts;
  opts.scenario_path = kScenarioDir + "/fig1.json";
  opts.trace_path = trace;
  opts.metrics_path = metrics;
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kExitOk);

  auto m = nlohmann::json::parse(slurp(metrics));
  CHECK(m["agents"]["blue"]["deviation"] == 2);
  CHECK(m["agents"]["green"]["deviation"] == 0);

  RunOptions fig2;
  fig2.scenario_path = kScenarioDir + "/fig2.json";
  fig2.metrics_path = metrics;
  CHECK(cmd_run(fig2, out, err) == kExitOk);
  auto m2 = nlohmann::json::parse(slurp(metrics));
  CHECK(m2["agents"]["red"]["deviation"] == 0);
  CHECK(m2["agents"]["red"]["pathfinder_calls"] == 0);
}

TEST_CASE("cmd_run rejects malformed scenarios") {
  std::string bad = tmp_path("mas_bad_scenario.json");
  std::ofstream(bad) << "{ not json";
  RunOptions opts;
  opts.scenario_path = bad;
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kExitConfig);
  CHECK(err.str().find("error") != std::string::npos);
}

TEST_CASE("golden trace: the two-agent scenario is pinned byte for byte") {
  SimConfig config = load_scenario_file(kScenarioDir + "/fig1.json");
  RunResult result = Simulator(config).run();
  std::ostringstream trace;
  write_trace(trace, config, result);
  CHECK(trace.str() == slurp(kGoldenDir + "/fig1_trace.jsonl"));

  SimConfig config2 = load_scenario_file(kScenarioDir + "/fig2.json");
  RunResult result2 = Simulator(config2).run();
  std::ostringstream trace2;
  write_trace(trace2, config2, result2);
  CHECK(trace2.str() == slurp(kGoldenDir + "/fig2_trace.jsonl"));
}

TEST_CASE("cmd_validate") {
  std::ostringstream out, err;
  CHECK(cmd_validate(kScenarioDir + "/fig1.json", out, err) == kExitOk);
  // fig1 has lookahead=3, k=2, d=4: lookahead <= k < comm_dist fails -> warn.
  CHECK(out.str().find("warning") != std::string::npos);

  // Duplicate starts: initial safety violation.
  std::string dup = tmp_path("mas_dup_starts.json");
  std::ofstream(dup) << R"({"grid":{"width":4,"height":4},"agents":[
    {"id":"a","start":[1,1],"plan":"r"},{"id":"b","start":[1,1],"plan":"l"}]})";
  std::ostringstream out2, err2;
  CHECK(cmd_validate(dup, out2, err2) == kExitConfig);

  // Custom graph without idle self-loops fails the load-time assumptions.
  std::string graph = tmp_path("mas_no_loop.graph");
  std::ofstream(graph) << "a f b\nb f a\n";
  std::string scen = tmp_path("mas_no_loop.json");
  std::ofstream(scen) << R"({"graph_file":")" << graph
                      << R"(","agents":[{"id":"a","start":"a","plan":""}]})";
  std::ostringstream out3, err3;
  CHECK(cmd_validate(scen, out3, err3) == kExitConfig);
  CHECK(err3.str().find("self-loop") != std::string::npos);
}

TEST_CASE("cmd_replay round-trips and catches corruption") {
  std::string trace = tmp_path("mas_replay_trace.jsonl");
  RunOptions opts;
  opts.scenario_path = kScenarioDir + "/fig2.json";
  opts.trace_path = trace;
  std::ostringstream out, err;
  REQUIRE(cmd_run(opts, out, err) == kExitOk);
  CHECK(cmd_replay(trace, out, err) == kExitOk);

  // Corrupt a position so two agents collide.
  std::string lines = slurp(trace);
  auto pos = lines.find("\"blue\":[4,2]");
  REQUIRE(pos != std::string::npos);
  lines.replace(pos, 12, "\"blue\":[3,3]");  // red's cell at tick 1
  std::string corrupted = tmp_path("mas_replay_bad.jsonl");
  std::ofstream(corrupted) << lines;
  std::ostringstream out2, err2;
  CHECK(cmd_replay(corrupted, out2, err2) == kExitAbort);

  // Empty trace: passes with zero metrics.
  std::string empty = tmp_path("mas_replay_empty.jsonl");
  std::ofstream(empty) << "";
  std::ostringstream out3, err3;
  CHECK(cmd_replay(empty, out3, err3) == kExitOk);
}

TEST_CASE("replay recomputes deviations from the trace alone") {
  SimConfig config = load_scenario_file(kScenarioDir + "/fig1.json");
  RunResult result = Simulator(config).run();
  std::stringstream trace;
  write_trace(trace, config, result);
  ReplaySummary summary = replay_trace(trace);
  REQUIRE(summary.ok);
  REQUIRE(summary.deviation.size() == 2);
  CHECK(summary.deviation[0] == std::pair<std::string, int>{"blue", 2});
  CHECK(summary.deviation[1] == std::pair<std::string, int>{"green", 0});
}

TEST_CASE("cmd_plot emits one csv per agent") {
  std::string trace = tmp_path("mas_plot_trace.jsonl");
  RunOptions opts;
  opts.scenario_path = kScenarioDir + "/fig1.json";
  opts.trace_path = trace;
  std::ostringstream out, err;
  REQUIRE(cmd_run(opts, out, err) == kExitOk);
  std::string dir = tmp_path("mas_plot_out");
  CHECK(cmd_plot(trace, dir, out, err) == kExitOk);
  CHECK(std::filesystem::exists(dir + "/blue.csv"));
  CHECK(std::filesystem::exists(dir + "/green.csv"));
  std::string blue = slurp(dir + "/blue.csv");
  CHECK(blue.find("tick,x,y") == 0);
  CHECK(blue.find("5,1,2") != std::string::npos);  // arrival
}

TEST_CASE("random agents via run options") {
  RunOptions opts;
  opts.grid = "12x12";
  opts.agents = 6;
  opts.seed = 99;
  opts.lookahead = 3;
  opts.deviation = 2;
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kExitOk);
}

TEST_CASE("the built binary behaves like the library commands") {
  std::string cmd = std::string(MAS_SIM_BIN) + " run --scenario " + kScenarioDir +
                    "/fig1.json > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  std::string bad = std::string(MAS_SIM_BIN) + " run --scenario /nonexistent.json > /dev/null 2>&1";
  int rc = std::system(bad.c_str());
  CHECK(WEXITSTATUS(rc) == 1);
}

TEST_CASE("bench rows reach the closed-form reservation size") {
  BenchRow small = bench_row(3, 3, 3, 3);
  CHECK(small.single_group);
  CHECK(small.reservation_max == 18);
  CHECK(small.expected_reservation == 18);

  BenchRow mid = bench_row(3, 5, 5, 5);
  CHECK(mid.reservation_max == 30);
}

TEST_CASE("per-agent random plans and whole-roster generation") {
  nlohmann::json j = {{"grid", {{"width", 8}, {"height", 8}}},
                      {"lookahead", 3},
                      {"seed", 5},
                      {"agents",
                       {{{"id", "a"}, {"start", {0, 0}}, {"plan", {{"random_length", 6}}}},
                        {{"id", "b"}, {"start", {7, 7}}, {"plan", "ll"}}}}};
  SimConfig config = load_scenario_json(j, "");
  CHECK(config.agents[0].plan.size() == 6);
  CHECK_NOTHROW(config.env->run_word(config.agents[0].start, config.agents[0].plan));
  CHECK(config.agents[1].plan == "ll");
  // Same seed, same generated plan.
  SimConfig again = load_scenario_json(j, "");
  CHECK(again.agents[0].plan == config.agents[0].plan);

  nlohmann::json r = {{"grid", {{"width", 10}, {"height", 10}}},
                      {"lookahead", 3},
                      {"seed", 9},
                      {"random_agents", {{"count", 5}, {"plan_length", 7}}}};
  SimConfig roster = load_scenario_json(r, "");
  CHECK(roster.agents.size() == 5);

  RunOptions opts;  // --grid without --agents is a config error
  opts.grid = "6x6";
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kExitConfig);
}

TEST_CASE("the aborting corridor maps to exit code 2") {
  std::string path = (std::filesystem::temp_directory_path() / "mas_abort.json").string();
  std::ofstream(path) << R"({"grid":{"width":3,"height":1},"lookahead":2,"deviation":0,
    "comm_dist":3,"safety":"collision+swap","agents":[
    {"id":"a","start":[0,0],"plan":""},
    {"id":"b","start":[1,0],"plan":""},
    {"id":"push","start":[2,0],"plan":"ll"}]})";
  RunOptions opts;
  opts.scenario_path = path;
  std::ostringstream out, err;
  CHECK(cmd_run(opts, out, err) == kExitAbort);
  CHECK(err.str().find("abort") != std::string::npos);
}
