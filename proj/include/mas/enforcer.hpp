#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mas/environment.hpp"
#include "mas/ordering.hpp"
#include "mas/pathfinder.hpp"
#include "mas/safety.hpp"
#include "mas/types.hpp"

namespace mas {

/// One group member's slice of the joint window: its rank, current vertex,
/// committed word (at most lookahead+k actions) and current block goal.
struct WindowEntry {
  AgentId agent = kInvalidAgent;
  int rank = 0;
  VertexId start = kInvalidVertex;
  std::string word;
  VertexId goal = kInvalidVertex;
};

/// The (rank, vertex, word) tuple per member, ascending rank.
struct JointWindow {
  std::vector<WindowEntry> entries;

  WindowEntry& entry_of(AgentId a);
  const WindowEntry& entry_of(AgentId a) const;
};

struct WindowViolation {
  int offset = 0;
  std::vector<AgentId> agents;
  VertexId vertex = kInvalidVertex;
};

/// Every violation in the window, ordered by (offset, vertex). Members whose
/// word has ended are pinned at their final vertex.
std::vector<WindowViolation> window_violations(const Environment& env, const JointWindow& window,
                                               const SafetyFn& phi);

/// Earliest violation or nullopt.
std::optional<WindowViolation> detect_violation(const Environment& env, const JointWindow& window,
                                                const SafetyFn& phi);

/// Trajectory substitution: replaces only u's entry with the pathfinder
/// result; for escapes, each forced agent's entry becomes its single forced
/// action. Ranks and all other entries are untouched.
void s1_apply(JointWindow& window, AgentId u, const PathResult& result);

struct EnforceEvents {
  std::function<void(AgentId agent, PathResult::Kind kind, const std::string& old_word,
                     const std::string& new_word, int expanded, int reserved,
                     std::int64_t wall_ns, bool repair)>
      replan;
  std::function<void(AgentId agent, char action)> forced;
};

struct GroupEnforceResult {
  bool unresolved = false;          // a next-instant violation survived the sweep
  std::string abort_reason;         // nonempty when the group cannot stay safe
  int pathfinder_calls = 0;
  std::vector<std::int64_t> call_wall_ns;
  int max_future_reservations = 0;
  std::uint64_t round_replanned = 0;  // agents whose entry a violation round changed
  bool top_entry_modified = false;    // the top-ranked entry changed (must stay false)
};

struct GroupEnforceContext {
  const Environment* env = nullptr;
  const SafetyFn* phi = nullptr;
  int lookahead = 1;
  int k = 0;
  std::span<const VertexId> positions;      // world positions indexed by agent
  const std::vector<AgentId>* members = nullptr;
  const PriorityOrder* order = nullptr;
  std::uint64_t repair_mask = 0;            // agents with an exhausted word away from their goal
  OrderingState* ordering = nullptr;        // for the contact-set clearing rule
  std::mt19937_64* rng = nullptr;
  const EnforceEvents* events = nullptr;
};

/// Repair pass plus the violation-triggered replanning round for one group.
///
/// Repair: agents flagged in repair_mask re-synthesize a word toward their
/// block goal in ascending rank order; the top-ranked agent searches
/// unconstrained.
///
/// Round: while violations remain, agents involved in one replan in ascending
/// rank order against the shared reservation table (their own entries masked);
/// the top-ranked agent is never touched. The round leaves either a clean
/// window or deferred violations at offsets >= 2; a surviving offset-1
/// violation is reported as unresolved.
GroupEnforceResult enforce_group(const GroupEnforceContext& ctx, JointWindow& window,
                                 ReservationTable& table);

}  // namespace mas
