#include "mas/ordering.hpp"

#include <algorithm>
#include <bit>

namespace mas {

OrderingState::OrderingState(int agent_count) : n_(agent_count) {
  if (agent_count < 0 || agent_count > kMaxAgents) {
    throw TooManyAgents("agent count must be in [0, " + std::to_string(kMaxAgents) + "]");
  }
  flags_.assign(static_cast<size_t>(n_), 0);
  contacts_.assign(static_cast<size_t>(n_), 0);
}

void OrderingState::write_flag(AgentId owner, AgentId other, bool value,
                               const OrderingEvents* events) {
  bool old = flag(owner, other);
  if (old == value) return;
  if (value) {
    flags_[static_cast<size_t>(owner)] |= std::uint64_t{1} << other;
    if (events && events->flag_set) events->flag_set(owner, other);
  } else {
    flags_[static_cast<size_t>(owner)] &= ~(std::uint64_t{1} << other);
  }
  if (log_writes_) write_log_.emplace_back(owner, other, value);
}

void OrderingState::on_goal(AgentId u, const OrderingEvents* events) {
  std::uint64_t pending = contacts_[static_cast<size_t>(u)];
  while (pending) {
    int v = std::countr_zero(pending);
    pending &= pending - 1;
    write_flag(u, v, true, events);
  }
  contacts_[static_cast<size_t>(u)] = 0;
}

void OrderingState::on_contact(AgentId u, std::uint64_t group_mask) {
  contacts_[static_cast<size_t>(u)] |= group_mask & ~(std::uint64_t{1} << u);
}

void OrderingState::reset_pair(AgentId u, AgentId v, const OrderingEvents* events) {
  if (!(flag(u, v) && flag(v, u))) return;
  write_flag(u, v, false, events);
  write_flag(v, u, false, events);
  if (events && events->flag_reset) events->flag_reset(std::min(u, v), std::max(u, v));
}

void OrderingState::tick_update(std::span<const std::uint64_t> group_mask_of,
                                std::uint64_t goal_mask, const OrderingEvents* events) {
  for (AgentId u = 0; u < n_; ++u) {
    if (goal_mask >> u & 1) on_goal(u, events);
  }
  for (AgentId u = 0; u < n_; ++u) {
    on_contact(u, group_mask_of[static_cast<size_t>(u)]);
  }
  for (AgentId u = 0; u < n_; ++u) {
    std::uint64_t co = group_mask_of[static_cast<size_t>(u)] & ~(std::uint64_t{1} << u);
    while (co) {
      int v = std::countr_zero(co);
      co &= co - 1;
      if (v > u) reset_pair(u, v, events);
    }
  }
}

Precedence precedes(const OrderingState& state, AgentId u, AgentId v) {
  bool uv = state.flag(u, v), vu = state.flag(v, u);
  if (uv && !vu) return Precedence::Before;
  if (vu && !uv) return Precedence::After;
  return Precedence::Equal;
}

PriorityOrder total_order(const CommGroup& group, const OrderingState& state,
                          std::span<const int> initial_rank) {
  const auto& members = group.members;
  const size_t m = members.size();

  // Strict-order in-degrees within the group.
  std::vector<int> indeg(m, 0);
  std::vector<std::vector<size_t>> below(m);  // below[i]: members that i precedes
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = i + 1; j < m; ++j) {
      switch (precedes(state, members[i], members[j])) {
        case Precedence::Before:
          below[i].push_back(j);
          ++indeg[j];
          break;
        case Precedence::After:
          below[j].push_back(i);
          ++indeg[i];
          break;
        case Precedence::Equal:
          break;
      }
    }
  }

  PriorityOrder order;
  order.rank_of.assign(initial_rank.size(), -1);
  std::vector<bool> placed(m, false);
  for (size_t step = 0; step < m; ++step) {
    // Among members with no unplaced predecessor, take the smallest initial
    // rank; it becomes the next-lowest priority.
    size_t pick = m;
    for (size_t i = 0; i < m; ++i) {
      if (placed[i] || indeg[i] != 0) continue;
      if (pick == m || initial_rank[static_cast<size_t>(members[i])] <
                           initial_rank[static_cast<size_t>(members[pick])]) {
        pick = i;
      }
    }
    if (pick == m) throw CyclicFlags("cycle in pairwise progress flags");
    placed[pick] = true;
    order.rank_of[static_cast<size_t>(members[pick])] = static_cast<int>(step);
    order.ascending.push_back(members[pick]);
    for (size_t j : below[pick]) --indeg[j];
  }
  return order;
}

}  // namespace mas
