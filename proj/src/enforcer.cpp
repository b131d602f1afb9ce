#include "mas/enforcer.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace mas {

WindowEntry& JointWindow::entry_of(AgentId a) {
  for (auto& e : entries) {
    if (e.agent == a) return e;
  }
  throw std::logic_error("agent not in window");
}

const WindowEntry& JointWindow::entry_of(AgentId a) const {
  return const_cast<JointWindow*>(this)->entry_of(a);
}

std::vector<WindowViolation> window_violations(const Environment& env, const JointWindow& window,
                                               const SafetyFn& phi) {
  std::vector<std::vector<VertexId>> paths;
  size_t horizon = 0;
  paths.reserve(window.entries.size());
  for (const WindowEntry& e : window.entries) {
    paths.push_back(positions(env, {e.start, e.word}));
    horizon = std::max(horizon, e.word.size());
  }

  std::vector<WindowViolation> out;
  std::vector<VertexId> prev, cur(window.entries.size());
  for (size_t t = 0; t <= horizon; ++t) {
    for (size_t i = 0; i < paths.size(); ++i) {
      cur[i] = paths[i][std::min(t, paths[i].size() - 1)];
    }
    std::map<VertexId, std::vector<AgentId>> at;
    for (size_t i = 0; i < cur.size(); ++i) at[cur[i]].push_back(window.entries[i].agent);
    for (const auto& [v, agents] : at) {
      if (agents.size() > 1) out.push_back({static_cast<int>(t), agents, v});
    }
    if (phi.min_separation() > 0) {
      for (size_t i = 0; i < cur.size(); ++i) {
        for (size_t j = i + 1; j < cur.size(); ++j) {
          if (cur[i] == cur[j]) continue;  // already a collision
          auto d1 = env.try_distance(cur[i], cur[j]);
          auto d2 = env.try_distance(cur[j], cur[i]);
          int d = std::numeric_limits<int>::max();
          if (d1) d = std::min(d, *d1);
          if (d2) d = std::min(d, *d2);
          if (d < phi.min_separation()) {
            out.push_back({static_cast<int>(t),
                           {window.entries[i].agent, window.entries[j].agent},
                           std::min(cur[i], cur[j])});
          }
        }
      }
    }
    if (phi.swap_sensitive() && t > 0) {
      for (size_t i = 0; i < cur.size(); ++i) {
        for (size_t j = i + 1; j < cur.size(); ++j) {
          if (prev[i] != prev[j] && cur[i] == prev[j] && cur[j] == prev[i]) {
            out.push_back({static_cast<int>(t),
                           {window.entries[i].agent, window.entries[j].agent},
                           std::min(prev[i], prev[j])});
          }
        }
      }
    }
    prev = cur;
  }
  std::sort(out.begin(), out.end(), [](const WindowViolation& a, const WindowViolation& b) {
    return std::tie(a.offset, a.vertex) < std::tie(b.offset, b.vertex);
  });
  return out;
}

std::optional<WindowViolation> detect_violation(const Environment& env, const JointWindow& window,
                                                const SafetyFn& phi) {
  auto all = window_violations(env, window, phi);
  if (all.empty()) return std::nullopt;
  return all.front();
}

void s1_apply(JointWindow& window, AgentId u, const PathResult& result) {
  window.entry_of(u).word = result.word;
  for (const auto& [m, action] : result.forced_moves) {
    window.entry_of(m).word = std::string(1, action);
  }
}

namespace {

bool involved(AgentId a, const std::vector<WindowViolation>& violations) {
  for (const auto& v : violations) {
    if (std::find(v.agents.begin(), v.agents.end(), a) != v.agents.end()) return true;
  }
  return false;
}

std::uint64_t partners_of(AgentId a, const std::vector<WindowViolation>& violations) {
  std::uint64_t mask = 0;
  for (const auto& v : violations) {
    if (std::find(v.agents.begin(), v.agents.end(), a) == v.agents.end()) continue;
    for (AgentId other : v.agents) {
      if (other != a) mask |= std::uint64_t{1} << other;
    }
  }
  return mask;
}

}  // namespace

GroupEnforceResult enforce_group(const GroupEnforceContext& ctx, JointWindow& window,
                                 ReservationTable& table) {
  GroupEnforceResult res;
  res.max_future_reservations = table.future_entry_count();
  const Environment& env = *ctx.env;

  auto run_pathfinder = [&](const WindowEntry& entry, bool unconstrained, bool in_round) {
    PathfindRequest req;
    req.agent = entry.agent;
    req.pos = entry.start;
    req.goal = entry.goal;
    req.table = unconstrained ? nullptr : &table;
    req.positions = ctx.positions;
    req.members = ctx.members;
    req.order = ctx.order;
    req.phi = ctx.phi;
    req.k = ctx.k;
    req.rng = ctx.rng;
    // An escape chain may disturb agents the sweep can still reach: those
    // strictly above the escaper, except the top. Everyone else is frozen.
    req.escape_avoid_mask = std::uint64_t{1} << ctx.order->top();
    if (in_round) {
      for (AgentId m : *ctx.members) {
        if (ctx.order->rank(m) < entry.rank) req.escape_avoid_mask |= std::uint64_t{1} << m;
      }
    }
    SearchStats stats;
    auto t0 = std::chrono::steady_clock::now();
    PathResult result = pathfind(env, req, &stats);
    auto t1 = std::chrono::steady_clock::now();
    res.pathfinder_calls += 1;
    res.call_wall_ns.push_back(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    return std::make_tuple(result, stats, res.call_wall_ns.back());
  };

  auto apply = [&](AgentId u, const PathResult& result, int expanded, std::int64_t wall_ns,
                   bool repair, bool unconstrained) {
    std::string old_word = window.entry_of(u).word;
    s1_apply(window, u, result);
    const WindowEntry& e = window.entry_of(u);
    // Entries the search ran against: the shared table minus the searcher.
    int reserved = unconstrained ? 0 : table.future_entry_count() - table.horizon();
    table.commit(env, u, e.start, e.word);
    for (const auto& [m, action] : result.forced_moves) {
      const WindowEntry& fe = window.entry_of(m);
      table.commit(env, m, fe.start, fe.word);
      if (m == ctx.order->top()) res.top_entry_modified = true;
      if (ctx.events && ctx.events->forced) ctx.events->forced(m, action);
    }
    if (ctx.events && ctx.events->replan) {
      ctx.events->replan(u, result.kind, old_word, e.word, expanded, reserved, wall_ns, repair);
    }
  };

  std::vector<const WindowEntry*> by_rank;
  for (const WindowEntry& entry : window.entries) by_rank.push_back(&entry);
  std::sort(by_rank.begin(), by_rank.end(),
            [](const WindowEntry* a, const WindowEntry* b) { return a->rank < b->rank; });

  // Repair pass: re-synthesize words for agents whose current word ended away
  // from their block goal. The top-ranked agent searches with an empty table;
  // everyone else plans around all committed entries.
  for (const WindowEntry* e : by_rank) {
    if (!(ctx.repair_mask >> e->agent & 1)) continue;
    const bool top = e->agent == ctx.order->top();
    try {
      auto [result, stats, wall] = run_pathfinder(*e, top, false);
      apply(e->agent, result, stats.expanded, wall, true, top);
    } catch (const NoEscape& ex) {
      res.abort_reason = ex.what();
      return res;
    }
  }

  // Violation round: ascending rank, top-ranked agent never modified. Each
  // processed agent plans against every other member's committed entry,
  // including fixes applied earlier in this round.
  auto violations = window_violations(env, window, *ctx.phi);
  if (!violations.empty()) {
    for (const WindowEntry* e : by_rank) {
      if (e->agent == ctx.order->top()) continue;
      violations = window_violations(env, window, *ctx.phi);
      if (violations.empty()) break;
      if (!involved(e->agent, violations)) continue;
      std::uint64_t partners = partners_of(e->agent, violations);
      try {
        auto [result, stats, wall] = run_pathfinder(*e, false, true);
        apply(e->agent, result, stats.expanded, wall, false, false);
        res.round_replanned |= std::uint64_t{1} << e->agent;
      } catch (const NoEscape& ex) {
        res.abort_reason = ex.what();
        return res;
      }
      // A replan forced by a strictly flag-ordered partner also empties the
      // agent's contact set, delaying its next demotion.
      if (ctx.ordering) {
        std::uint64_t m = partners;
        while (m) {
          int v = std::countr_zero(m);
          m &= m - 1;
          if (precedes(*ctx.ordering, e->agent, v) == Precedence::Before) {
            ctx.ordering->clear_contacts(e->agent);
            break;
          }
        }
      }
    }
    violations = window_violations(env, window, *ctx.phi);
    for (const auto& v : violations) {
      if (v.offset <= 1) {
        res.unresolved = true;
        break;
      }
    }
  }
  return res;
}

}  // namespace mas
