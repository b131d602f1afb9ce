#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mas/environment.hpp"
#include "mas/trajectory.hpp"
#include "mas/types.hpp"

namespace mas {

/// Communication group: members sorted ascending, canonical id = smallest
/// member. Two agents share a group iff they are linked by a chain of hops of
/// graph distance <= d.
struct CommGroup {
  std::vector<AgentId> members;

  AgentId id() const { return members.front(); }
  std::uint64_t mask() const {
    std::uint64_t m = 0;
    for (AgentId a : members) m |= std::uint64_t{1} << a;
    return m;
  }
};

/// Connected components of the agent-proximity graph, sorted by canonical id.
/// Distance is the static graph metric (min of the two directions on
/// non-symmetric graphs), ignoring occupancy.
std::vector<CommGroup> comm_groups(const Environment& env, std::span<const VertexId> positions,
                                   int comm_dist);

/// What one group member exposes to the others each tick.
struct AgentSnapshot {
  VertexId position = kInvalidVertex;
  std::string_view remaining_word;  // current intended word from `position`
  bool goal_flag = false;
};

struct SharedPlan {
  AgentId agent = kInvalidAgent;
  Trajectory prefix;            // trajectory prefix of length <= lookahead
  bool goal_flag = false;
  bool flag_toward_viewer = false;  // c_agent^viewer
};

struct SharedView {
  AgentId viewer = kInvalidAgent;
  std::vector<SharedPlan> others;  // sorted by agent id; never includes the viewer
};

/// Per-member views over a group: each member learns every other member's
/// length-<=lookahead trajectory prefix, goal flag, and the pairwise progress
/// flag pointed at the viewer.
std::vector<SharedView> share_plans(
    const CommGroup& group, std::span<const AgentSnapshot> snapshots, int lookahead,
    const std::function<bool(AgentId owner, AgentId other)>& flag);

}  // namespace mas
