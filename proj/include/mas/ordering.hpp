#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <tuple>
#include <vector>

#include "mas/communication.hpp"
#include "mas/errors.hpp"
#include "mas/types.hpp"

namespace mas {

struct OrderingEvents {
  // Emitted on 0 -> 1 transitions only.
  std::function<void(AgentId owner, AgentId other)> flag_set;
  // Emitted once per pair (a < b) when the mutual-completion guard fires.
  std::function<void(AgentId a, AgentId b)> flag_reset;
};

/// Pairwise progress flags c_u^v and contact sets B_u for every agent.
///
/// Flag c_u^v is written only by operations acting on u; the optional write
/// log records (owner, other, value) triples so tests can audit locality.
class OrderingState {
 public:
  explicit OrderingState(int agent_count);

  int agent_count() const { return n_; }
  bool flag(AgentId owner, AgentId other) const {
    return flags_[static_cast<size_t>(owner)] >> other & 1;
  }
  std::uint64_t flag_row(AgentId owner) const { return flags_[static_cast<size_t>(owner)]; }
  std::uint64_t contacts(AgentId u) const { return contacts_[static_cast<size_t>(u)]; }

  /// Goal branch: u flags every agent in B_u, then clears B_u.
  void on_goal(AgentId u, const OrderingEvents* events = nullptr);

  /// Contact accumulation: B_u gains u's current co-group members.
  void on_contact(AgentId u, std::uint64_t group_mask);

  /// Empties B_u (Algorithm-2 branch after a forced replan).
  void clear_contacts(AgentId u) { contacts_[static_cast<size_t>(u)] = 0; }

  /// Mutual-completion reset: when c_u^v = c_v^u = 1 and the pair is co-group
  /// both flags return to 0 (each side clears its own flag).
  void reset_pair(AgentId u, AgentId v, const OrderingEvents* events = nullptr);

  /// One full ordering tick: goal branches, contact accumulation, pair resets.
  /// `group_mask_of[u]` is the member mask of u's current group (including u).
  void tick_update(std::span<const std::uint64_t> group_mask_of, std::uint64_t goal_mask,
                   const OrderingEvents* events = nullptr);

  void enable_write_log(bool on) { log_writes_ = on; }
  const std::vector<std::tuple<AgentId, AgentId, bool>>& write_log() const { return write_log_; }

 private:
  void write_flag(AgentId owner, AgentId other, bool value, const OrderingEvents* events);

  int n_;
  std::vector<std::uint64_t> flags_;     // flags_[u] bit v = c_u^v
  std::vector<std::uint64_t> contacts_;  // B_u
  bool log_writes_ = false;
  std::vector<std::tuple<AgentId, AgentId, bool>> write_log_;
};

enum class Precedence { Before, After, Equal };

/// Strict pairwise order from the flags: u comes before v iff c_u^v = 1 and
/// c_v^u = 0. Both-set pairs are equal pending reset.
Precedence precedes(const OrderingState& state, AgentId u, AgentId v);

/// Total priority order over one group's members: ascending[0] is the lowest
/// priority (first to replan), ascending.back() the highest (never replans).
struct PriorityOrder {
  std::vector<AgentId> ascending;
  std::vector<int> rank_of;  // indexed by agent id; -1 outside the group

  AgentId top() const { return ascending.back(); }
  int rank(AgentId a) const { return rank_of[static_cast<size_t>(a)]; }
};

/// Linear extension of the strict pairwise order, ties broken toward the
/// smallest initial rank among currently unconstrained members. Throws
/// CyclicFlags if the strict order has a cycle (unreachable under the
/// mechanism).
PriorityOrder total_order(const CommGroup& group, const OrderingState& state,
                          std::span<const int> initial_rank);

}  // namespace mas
