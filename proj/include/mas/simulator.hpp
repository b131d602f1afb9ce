#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mas/communication.hpp"
#include "mas/enforcer.hpp"
#include "mas/environment.hpp"
#include "mas/ordering.hpp"
#include "mas/safety.hpp"
#include "mas/trajectory.hpp"
#include "mas/types.hpp"

namespace mas {

struct AgentSpec {
  std::string name;
  VertexId start = kInvalidVertex;
  std::string plan;

  bool operator==(const AgentSpec&) const = default;
};

struct SimConfig {
  std::shared_ptr<const Environment> env;
  int lookahead = 3;
  int deviation_k = 2;
  int comm_dist = -1;  // -1: defaults to lookahead
  std::string safety_name = "collision";
  std::uint64_t seed = 0;
  int max_ticks = 10000;
  bool parallel_groups = false;
  bool randomized_fallback = false;
  std::vector<AgentSpec> agents;

  int resolved_comm_dist() const { return comm_dist < 0 ? lookahead : comm_dist; }
};

// Trace events, one tick's worth per StepRecord.
struct GoalEvent {
  AgentId agent;
};
struct BlockAdvanceEvent {
  AgentId agent;
  int block_index;
};
struct ReplanEvent {
  AgentId agent;
  PathResult::Kind result;
  std::string old_word;
  std::string new_word;
  int expanded = 0;
  int reserved = 0;
  std::int64_t wall_ns = 0;  // metrics only, never serialized into traces
  bool repair = false;
};
struct ForcedEvent {
  AgentId agent;
  char action;
};
struct FlagSetEvent {
  AgentId owner;
  AgentId other;
};
struct FlagResetEvent {
  AgentId a;
  AgentId b;
};
struct DiagnosticEvent {
  std::string message;
};
using Event = std::variant<GoalEvent, BlockAdvanceEvent, ReplanEvent, ForcedEvent, FlagSetEvent,
                           FlagResetEvent, DiagnosticEvent>;

/// One simulation tick: the world state at time `tick` plus everything the
/// enforcers did before the step was taken. `acts` is empty on the terminal
/// record.
struct StepRecord {
  int tick = 0;
  std::vector<VertexId> positions;
  std::vector<std::vector<AgentId>> groups;
  std::vector<Event> events;
  std::string acts;  // one action char per agent, in agent order
};

struct BlockStat {
  AgentId agent;
  int block_index;
  int original_len;
  int activated_tick;
  int completed_tick = -1;  // -1: incomplete at run end
};

struct RoundStat {
  std::int64_t wall_ns = 0;
  int group_size = 0;
  int calls = 0;
};

struct CallStat {
  int tick = 0;
  AgentId agent = kInvalidAgent;
  PathResult::Kind result = PathResult::Kind::Full;
  int expanded = 0;
  int reserved = 0;
  std::int64_t wall_ns = 0;
};

struct Metrics {
  std::vector<int> deviation;         // per agent, summed over completed blocks
  std::vector<int> pathfinder_calls;  // per agent
  std::vector<int> escape_count;
  std::vector<BlockStat> blocks;
  int total_pathfinder_calls = 0;
  int max_block_deviation = 0;
  int deviation_bound = 0;  // |U|^2 * lookahead
  int max_future_reservations = 0;
  int top_modified_rounds = 0;  // rounds that touched a top-ranked entry
  int round_count = 0;        // violation rounds that replanned someone
  std::vector<std::int64_t> call_wall_ns;
  std::vector<CallStat> calls;    // one entry per pathfinder invocation
  std::vector<RoundStat> rounds;  // group-enforcement invocations that did work
};

enum class RunStatus { Completed, MaxTicks, Aborted };

const char* to_string(RunStatus status);

struct RunResult {
  RunStatus status = RunStatus::Completed;
  std::string abort_reason;
  int ticks = 0;  // last recorded tick index
  std::vector<StepRecord> trace;
  Metrics metrics;
  std::vector<std::string> executed;  // per agent, concatenated executed actions
};

/// Deterministic lockstep engine. Each tick: recompute groups, run the
/// ordering updates (goal branches, contacts, resets), advance completed
/// blocks, repair and replan per group, then move every agent one step.
class Simulator {
 public:
  explicit Simulator(SimConfig config);  // throws ConfigError on invalid setups

  /// Runs to completion, abort, or max_ticks.
  RunResult run();

  const SimConfig& config() const { return config_; }

 private:
  struct AgentRuntime {
    VertexId pos;
    PlanCursor cursor;
    std::string word;  // committed word still to execute
    bool block_open = true;
    int block_activated = 0;
  };

  bool goal_reached(const AgentRuntime& a) const;
  void begin_tick(StepRecord& rec);
  void enforce_groups(StepRecord& rec);
  bool execute(StepRecord& rec);  // false on abort

  SimConfig config_;
  const Environment* env_;
  SafetyFn phi_;
  OrderingState ordering_;
  std::vector<int> initial_rank_;
  std::vector<AgentRuntime> agents_;
  std::vector<CommGroup> groups_;
  int tick_ = 0;
  RunResult result_;
};

/// Random agents: distinct starts, each plan a seeded random walk of the
/// requested length over the full action alphabet (idle included). With
/// `clearable_goals`, walks are resampled so final vertices are pairwise
/// distinct and avoid every other agent's block-boundary vertices, keeping
/// every per-block goal eventually reachable.
std::vector<AgentSpec> gen_random_plans(std::uint64_t seed, const Environment& env, int n_agents,
                                        int length, int lookahead_for_clearing = 0,
                                        bool clearable_goals = false);

}  // namespace mas
