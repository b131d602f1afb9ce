#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "mas/environment.hpp"
#include "mas/ordering.hpp"
#include "mas/safety.hpp"
#include "mas/types.hpp"

namespace mas {

/// Space-time reservations for committed trajectories within one group.
/// Each committed agent occupies one vertex per time offset in [0, horizon];
/// positions past the word's end are padded at its final vertex. Queries with
/// t > horizon clamp to the horizon.
class ReservationTable {
 public:
  ReservationTable(int agent_count, int horizon);

  int horizon() const { return horizon_; }
  void commit(const Environment& env, AgentId agent, VertexId start, std::string_view word);
  void release(AgentId agent);
  bool committed(AgentId agent) const { return !paths_[static_cast<size_t>(agent)].empty(); }
  const std::vector<AgentId>& committed_agents() const { return committed_; }

  VertexId position_of(AgentId agent, int t) const;
  bool reserved_by_other(VertexId v, int t, AgentId self) const;
  /// True when some agent from `among_mask` has (v, t) committed.
  bool reserved_among(VertexId v, int t, std::uint64_t among_mask) const;
  /// True when some other agent moves `to` -> `from` while `self` would move
  /// `from` -> `to` between offsets depart_t and depart_t+1.
  bool swap_with_other(VertexId from, VertexId to, int depart_t, AgentId self) const;

  /// Reserved (vertex, offset, agent) triples at offsets >= 1: exactly
  /// horizon() entries per committed agent.
  int future_entry_count() const { return static_cast<int>(committed_.size()) * horizon_; }

  /// All stored triples including offset 0, for inspection.
  std::vector<std::tuple<VertexId, int, AgentId>> entries() const;

 private:
  std::int64_t key(VertexId v, int t) const {
    return static_cast<std::int64_t>(v) * (horizon_ + 1) + t;
  }

  int horizon_;
  std::vector<std::vector<VertexId>> paths_;  // per agent, size horizon_+1 when committed
  std::vector<AgentId> committed_;
  std::unordered_map<std::int64_t, std::vector<AgentId>> cells_;
};

/// Reservations seen by `u` per the basic construction: the block prefixes of
/// every group member ranked strictly above u, padded to the horizon.
ReservationTable reservations_above(const Environment& env, AgentId u,
                                    const std::vector<SharedView>& views,
                                    const PriorityOrder& order, int lookahead, int k);

struct SearchStats {
  int expanded = 0;
};

/// Breadth-first search in the lazily expanded time-expanded graph for a word
/// leading from `start` to `goal` in tau steps, dist <= tau <= dist+k,
/// avoiding every reserved (vertex, offset) of other agents and keeping
/// phi-bar for u at every instant, including the parked tail after arrival.
/// Expansion follows the canonical action order; idle self-loops are not
/// expanded, so returned words contain moves only.
std::optional<std::string> find_safe_path(const Environment& env, AgentId u, VertexId start,
                                          VertexId goal, const ReservationTable* table,
                                          const SafetyFn& phi, int k, const PriorityOrder* order,
                                          SearchStats* stats = nullptr);

/// Fallback single action keeping the next instant safe: idle preferred, then
/// canonical move order. With `rng` set, picks uniformly among safe options.
std::optional<std::string> safe_hold(const Environment& env, AgentId u, VertexId pos,
                                     const ReservationTable* table, const SafetyFn& phi,
                                     const PriorityOrder* order, std::mt19937_64* rng = nullptr);

struct PathResult {
  enum class Kind { Full, Hold, Escape };
  Kind kind = Kind::Full;
  std::string word;  // u's next word (single action for Hold/Escape)
  std::vector<std::pair<AgentId, char>> forced_moves;  // Escape only
};

const char* to_string(PathResult::Kind kind);

/// Occupancy-graph fallback: shortest path (edges never removed, the single
/// top-priority agent's vertex deleted) to the nearest unoccupied vertex,
/// smallest vertex id on ties. Every agent standing on the path is forced one
/// step along it; u takes the first step.
///
/// `avoid_mask` names agents whose committed next-instant cells the shifted
/// chain must keep clear (those no round replanning can move anymore); chains
/// that clash with them are rejected and the search falls through to the next
/// candidate. Throws NoEscape when no workable unoccupied vertex is reachable.
PathResult escape(const Environment& env, AgentId u, VertexId pos,
                  std::span<const VertexId> positions, const std::vector<AgentId>& members,
                  const PriorityOrder& order, const ReservationTable* table = nullptr,
                  std::uint64_t avoid_mask = 0);

struct PathfindRequest {
  AgentId agent = kInvalidAgent;
  VertexId pos = kInvalidVertex;
  VertexId goal = kInvalidVertex;
  const ReservationTable* table = nullptr;  // nullptr = unconstrained search
  std::span<const VertexId> positions;      // escape occupancy (group members)
  const std::vector<AgentId>* members = nullptr;
  const PriorityOrder* order = nullptr;
  const SafetyFn* phi = nullptr;
  int k = 0;
  std::uint64_t escape_avoid_mask = 0;  // agents an escape chain must not disturb
  std::mt19937_64* rng = nullptr;
};

/// Full pathfinder ladder: safe path, else hold, else escape.
PathResult pathfind(const Environment& env, const PathfindRequest& req,
                    SearchStats* stats = nullptr);

}  // namespace mas
