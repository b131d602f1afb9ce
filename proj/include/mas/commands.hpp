#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mas/simulator.hpp"

namespace mas {

// Exit codes shared by every subcommand: 0 success, 1 configuration error,
// 2 abort / safety failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitAbort = 2;

struct RunOptions {
  std::string scenario_path;           // empty: build from --grid/--agents
  std::string trace_path;
  std::string metrics_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> lookahead;
  std::optional<int> deviation;
  std::optional<int> comm_dist;
  std::optional<int> max_ticks;
  std::optional<int> agents;           // random agents when no scenario lists them
  std::optional<int> plan_length;
  std::optional<std::string> grid;     // "WxH"
  bool parallel_groups = false;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const std::string& scenario_path, std::ostream& out, std::ostream& err);
int cmd_replay(const std::string& trace_path, std::ostream& out, std::ostream& err);
int cmd_plot(const std::string& trace_path, const std::string& out_dir, std::ostream& out,
             std::ostream& err);

struct BenchRow {
  int agents = 0;
  int grid_side = 0;
  int lookahead = 0;
  int k = 0;
  // measured
  int reservation_max = 0;
  int expected_reservation = 0;  // (lookahead+k)*agents
  bool single_group = false;
  std::int64_t best_ns = 0;
  std::int64_t worst_ns = 0;
  std::int64_t median_ns = 0;
};

/// One benchmark configuration: agents packed into a cluster with plans
/// converging on the cluster center, run just long enough to resolve the
/// resulting conflicts in a single communication group.
BenchRow bench_row(int agents, int grid_side, int lookahead, int k, std::uint64_t seed = 1);

/// The full scalability grid (same parameter rows for every run).
std::vector<BenchRow> bench_default_rows();

int cmd_bench(std::ostream& out, std::ostream& err);

}  // namespace mas
