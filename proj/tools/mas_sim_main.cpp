#include <iostream>

#include <CLI11.hpp>

#include "mas/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decentralized runtime safety enforcement simulator for multi-agent systems"};
  app.require_subcommand(1);

  mas::RunOptions run_opts;
  std::uint64_t seed_flag = 0;
  int lookahead_flag = 0, deviation_flag = -1, comm_flag = 0, ticks_flag = 0, agents_flag = 0,
      plan_len_flag = 0;
  std::string grid_flag;

  auto* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("--scenario", run_opts.scenario_path, "Scenario JSON file");
  run->add_option("--trace", run_opts.trace_path, "Write a JSON-lines trace here");
  run->add_option("--metrics", run_opts.metrics_path, "Write run metrics here");
  auto* seed_opt = run->add_option("--seed", seed_flag, "Override the master seed");
  auto* la_opt = run->add_option("--lookahead", lookahead_flag, "Override the look-ahead");
  auto* dev_opt = run->add_option("--deviation", deviation_flag, "Override the deviation bound k");
  auto* comm_opt = run->add_option("--comm-dist", comm_flag, "Override the communication constant");
  auto* ticks_opt = run->add_option("--max-ticks", ticks_flag, "Override the tick limit");
  auto* agents_opt = run->add_option("--agents", agents_flag, "Random agent count (no scenario)");
  auto* plan_opt = run->add_option("--plan-length", plan_len_flag, "Random plan length");
  auto* grid_opt = run->add_option("--grid", grid_flag, "Grid WxH (no scenario)");
  run->add_flag("--parallel-groups", run_opts.parallel_groups,
                "Evaluate disjoint groups concurrently");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario against the assumptions");
  validate->add_option("--scenario", validate_path, "Scenario JSON file")->required();

  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "Re-check safety and metrics of a trace");
  replay->add_option("--trace", replay_path, "Trace file")->required();

  auto* bench = app.add_subcommand("bench", "Run the scalability benchmark grid");

  std::string plot_trace, plot_dir = "plots";
  auto* plot = app.add_subcommand("plot", "Emit per-agent position CSVs from a trace");
  plot->add_option("--trace", plot_trace, "Trace file")->required();
  plot->add_option("--out-dir", plot_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (*seed_opt) run_opts.seed = seed_flag;
    if (*la_opt) run_opts.lookahead = lookahead_flag;
    if (*dev_opt) run_opts.deviation = deviation_flag;
    if (*comm_opt) run_opts.comm_dist = comm_flag;
    if (*ticks_opt) run_opts.max_ticks = ticks_flag;
    if (*agents_opt) run_opts.agents = agents_flag;
    if (*plan_opt) run_opts.plan_length = plan_len_flag;
    if (*grid_opt) run_opts.grid = grid_flag;
    return mas::cmd_run(run_opts, std::cout, std::cerr);
  }
  if (validate->parsed()) return mas::cmd_validate(validate_path, std::cout, std::cerr);
  if (replay->parsed()) return mas::cmd_replay(replay_path, std::cout, std::cerr);
  if (bench->parsed()) return mas::cmd_bench(std::cout, std::cerr);
  if (plot->parsed()) return mas::cmd_plot(plot_trace, plot_dir, std::cout, std::cerr);
  return 0;
}
