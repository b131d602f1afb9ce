#include "mas/pathfinder.hpp"

#include <algorithm>
#include <deque>

namespace mas {

namespace {

int sym_distance(const Environment& env, VertexId a, VertexId b) {
  auto d1 = env.try_distance(a, b);
  auto d2 = env.try_distance(b, a);
  int best = std::numeric_limits<int>::max();
  if (d1) best = std::min(best, *d1);
  if (d2) best = std::min(best, *d2);
  return best;
}

// Vertex-level admissibility of u standing at v at offset t: no reserved cell
// of another committed agent, and the min-distance part of phi-bar against
// agents ranked at or above u.
bool instant_ok(const Environment& env, AgentId u, VertexId v, int t,
                const ReservationTable* table, const SafetyFn& phi, const PriorityOrder* order) {
  if (table == nullptr) return true;
  if (table->reserved_by_other(v, t, u)) return false;
  if (phi.min_separation() > 0) {
    for (AgentId m : table->committed_agents()) {
      if (m == u) continue;
      if (order && order->rank(m) >= 0 && order->rank(u) >= 0 && order->rank(m) < order->rank(u)) {
        continue;  // phi-bar ignores lower-priority agents
      }
      VertexId mv = table->position_of(m, t);
      if (mv == kInvalidVertex) continue;
      if (sym_distance(env, v, mv) < phi.min_separation()) return false;
    }
  }
  return true;
}

// Once parked on `goal` at offset tau, the agent stays there; every later
// instant up to the reservation horizon must remain admissible.
bool parked_ok(const Environment& env, AgentId u, VertexId goal, int tau,
               const ReservationTable* table, const SafetyFn& phi, const PriorityOrder* order) {
  if (table == nullptr) return true;
  for (int t = tau + 1; t <= table->horizon(); ++t) {
    if (!instant_ok(env, u, goal, t, table, phi, order)) return false;
  }
  return true;
}

}  // namespace

ReservationTable::ReservationTable(int agent_count, int horizon) : horizon_(horizon) {
  if (horizon < 0) throw ConfigError("reservation horizon must be >= 0");
  paths_.resize(static_cast<size_t>(agent_count));
}

void ReservationTable::commit(const Environment& env, AgentId agent, VertexId start,
                              std::string_view word) {
  release(agent);
  auto& path = paths_[static_cast<size_t>(agent)];
  path.assign(static_cast<size_t>(horizon_) + 1, kInvalidVertex);
  VertexId cur = start;
  path[0] = cur;
  for (int t = 1; t <= horizon_; ++t) {
    if (static_cast<size_t>(t) <= word.size()) {
      cur = env.step(cur, word[static_cast<size_t>(t) - 1]);
    }
    path[static_cast<size_t>(t)] = cur;
  }
  for (int t = 0; t <= horizon_; ++t) {
    cells_[key(path[static_cast<size_t>(t)], t)].push_back(agent);
  }
  committed_.push_back(agent);
  std::sort(committed_.begin(), committed_.end());
}

void ReservationTable::release(AgentId agent) {
  auto& path = paths_[static_cast<size_t>(agent)];
  if (path.empty()) return;
  for (int t = 0; t <= horizon_; ++t) {
    auto it = cells_.find(key(path[static_cast<size_t>(t)], t));
    if (it != cells_.end()) {
      std::erase(it->second, agent);
      if (it->second.empty()) cells_.erase(it);
    }
  }
  path.clear();
  std::erase(committed_, agent);
}

VertexId ReservationTable::position_of(AgentId agent, int t) const {
  const auto& path = paths_[static_cast<size_t>(agent)];
  if (path.empty()) return kInvalidVertex;
  return path[static_cast<size_t>(std::clamp(t, 0, horizon_))];
}

bool ReservationTable::reserved_among(VertexId v, int t, std::uint64_t among_mask) const {
  if (t > horizon_) {
    for (AgentId m : committed_) {
      if ((among_mask >> m & 1) && position_of(m, horizon_) == v) return true;
    }
    return false;
  }
  auto it = cells_.find(key(v, t));
  if (it == cells_.end()) return false;
  for (AgentId m : it->second) {
    if (among_mask >> m & 1) return true;
  }
  return false;
}

bool ReservationTable::reserved_by_other(VertexId v, int t, AgentId self) const {
  if (t > horizon_) {
    for (AgentId m : committed_) {
      if (m != self && position_of(m, horizon_) == v) return true;
    }
    return false;
  }
  auto it = cells_.find(key(v, t));
  if (it == cells_.end()) return false;
  for (AgentId m : it->second) {
    if (m != self) return true;
  }
  return false;
}

bool ReservationTable::swap_with_other(VertexId from, VertexId to, int depart_t,
                                       AgentId self) const {
  for (AgentId m : committed_) {
    if (m == self) continue;
    if (position_of(m, depart_t) == to && position_of(m, depart_t + 1) == from) return true;
  }
  return false;
}

std::vector<std::tuple<VertexId, int, AgentId>> ReservationTable::entries() const {
  std::vector<std::tuple<VertexId, int, AgentId>> out;
  for (AgentId a : committed_) {
    const auto& path = paths_[static_cast<size_t>(a)];
    for (int t = 0; t <= horizon_; ++t) {
      out.emplace_back(path[static_cast<size_t>(t)], t, a);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ReservationTable reservations_above(const Environment& env, AgentId u,
                                    const std::vector<SharedView>& views,
                                    const PriorityOrder& order, int lookahead, int k) {
  ReservationTable table(static_cast<int>(order.rank_of.size()), lookahead + k);
  for (const SharedView& view : views) {
    if (view.viewer != u) continue;
    for (const SharedPlan& plan : view.others) {
      if (order.rank(plan.agent) > order.rank(u)) {
        table.commit(env, plan.agent, plan.prefix.start, plan.prefix.word);
      }
    }
  }
  return table;
}

std::optional<std::string> find_safe_path(const Environment& env, AgentId u, VertexId start,
                                          VertexId goal, const ReservationTable* table,
                                          const SafetyFn& phi, int k, const PriorityOrder* order,
                                          SearchStats* stats) {
  auto dist_opt = env.try_distance(start, goal);
  if (!dist_opt) return std::nullopt;
  const int dist = *dist_opt;
  const int cap = dist + k;

  if (start == goal && parked_ok(env, u, goal, 0, table, phi, order)) return std::string{};

  struct Node {
    VertexId v;
    int t;
    int parent;
    char action;
  };
  std::vector<Node> nodes;
  nodes.push_back({start, 0, -1, 0});
  const int n = env.vertex_count();
  std::vector<bool> visited(static_cast<size_t>(n) * static_cast<size_t>(cap + 1), false);
  visited[static_cast<size_t>(start) * static_cast<size_t>(cap + 1)] = true;

  auto reconstruct = [&](int idx) {
    std::string word;
    for (int i = idx; nodes[static_cast<size_t>(i)].parent != -1;
         i = nodes[static_cast<size_t>(i)].parent) {
      word.push_back(nodes[static_cast<size_t>(i)].action);
    }
    std::reverse(word.begin(), word.end());
    return word;
  };

  for (size_t head = 0; head < nodes.size(); ++head) {
    const Node cur = nodes[head];
    if (cur.t == cap) continue;
    for (const Environment::Edge& e : env.edges_from(cur.v)) {
      if (e.action == env.idle_action()) continue;
      const int t2 = cur.t + 1;
      size_t slot = static_cast<size_t>(e.to) * static_cast<size_t>(cap + 1) + static_cast<size_t>(t2);
      if (visited[slot]) continue;
      if (!instant_ok(env, u, e.to, t2, table, phi, order)) continue;
      if (phi.swap_sensitive() && table && table->swap_with_other(cur.v, e.to, cur.t, u)) continue;
      visited[slot] = true;
      nodes.push_back({e.to, t2, static_cast<int>(head), e.action});
      if (stats) ++stats->expanded;
      if (e.to == goal && t2 >= dist && parked_ok(env, u, goal, t2, table, phi, order)) {
        return reconstruct(static_cast<int>(nodes.size()) - 1);
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> safe_hold(const Environment& env, AgentId u, VertexId pos,
                                     const ReservationTable* table, const SafetyFn& phi,
                                     const PriorityOrder* order, std::mt19937_64* rng) {
  std::vector<char> safe;
  auto consider = [&](char action, VertexId to) {
    if (!instant_ok(env, u, to, 1, table, phi, order)) return;
    if (phi.swap_sensitive() && table && action != env.idle_action() &&
        table->swap_with_other(pos, to, 0, u)) {
      return;
    }
    safe.push_back(action);
  };
  consider(env.idle_action(), pos);
  if (!rng && !safe.empty()) return std::string(1, safe.front());
  for (const Environment::Edge& e : env.edges_from(pos)) {
    if (e.action == env.idle_action()) continue;
    consider(e.action, e.to);
    if (!rng && !safe.empty()) return std::string(1, safe.front());
  }
  if (safe.empty()) return std::nullopt;
  size_t pick = rng ? (*rng)() % safe.size() : 0;
  return std::string(1, safe[pick]);
}

const char* to_string(PathResult::Kind kind) {
  switch (kind) {
    case PathResult::Kind::Full: return "full";
    case PathResult::Kind::Hold: return "hold";
    case PathResult::Kind::Escape: return "escape";
  }
  return "?";
}

PathResult escape(const Environment& env, AgentId u, VertexId pos,
                  std::span<const VertexId> positions, const std::vector<AgentId>& members,
                  const PriorityOrder& order, const ReservationTable* table,
                  std::uint64_t avoid_mask) {
  std::unordered_map<VertexId, AgentId> occupant;
  for (AgentId m : members) occupant[positions[static_cast<size_t>(m)]] = m;
  const VertexId deleted = positions[static_cast<size_t>(order.top())];

  // Rebuilds the chain for a candidate target and accepts it when every
  // next-instant cell along it is free of commitments from outside the chain.
  std::unordered_map<VertexId, std::pair<VertexId, char>> parent;  // vertex -> (prev, action)
  auto try_target = [&](VertexId target) -> std::optional<PathResult> {
    std::vector<std::pair<VertexId, char>> path;  // (vertex, action taken to leave it)
    for (VertexId v = target; v != pos;) {
      auto [prev, action] = parent.at(v);
      path.emplace_back(prev, action);
      v = prev;
    }
    std::reverse(path.begin(), path.end());

    PathResult result;
    result.kind = PathResult::Kind::Escape;
    result.word = std::string(1, path.front().second);
    std::uint64_t chain = std::uint64_t{1} << u;
    for (size_t i = 1; i < path.size(); ++i) {
      auto it = occupant.find(path[i].first);
      if (it != occupant.end()) {
        result.forced_moves.emplace_back(it->second, path[i].second);
        chain |= std::uint64_t{1} << it->second;
      }
    }
    if (table != nullptr && (avoid_mask & ~chain) != 0) {
      // Cells occupied by the shifted chain at the next instant: every path
      // vertex except the vacated start.
      VertexId v = pos;
      for (size_t i = 0; i < path.size(); ++i) {
        v = env.step(path[i].first, path[i].second);
        if (table->reserved_among(v, 1, avoid_mask & ~chain)) return std::nullopt;
      }
    }
    return result;
  };

  std::vector<VertexId> level{pos};
  parent.emplace(pos, std::make_pair(kInvalidVertex, '\0'));
  while (!level.empty()) {
    std::vector<VertexId> next;
    for (VertexId v : level) {
      for (const Environment::Edge& e : env.edges_from(v)) {
        if (e.action == env.idle_action() || e.to == deleted) continue;
        if (parent.contains(e.to)) continue;
        parent.emplace(e.to, std::make_pair(v, e.action));
        next.push_back(e.to);
      }
    }
    std::vector<VertexId> free;
    for (VertexId v : next) {
      if (!occupant.contains(v)) free.push_back(v);
    }
    std::sort(free.begin(), free.end());
    for (VertexId target : free) {
      if (auto result = try_target(target)) return *result;
    }
    level = std::move(next);
  }
  throw NoEscape("no unoccupied vertex reachable from " + env.vertex_name(pos));
}

PathResult pathfind(const Environment& env, const PathfindRequest& req, SearchStats* stats) {
  if (auto word = find_safe_path(env, req.agent, req.pos, req.goal, req.table, *req.phi, req.k,
                                 req.order, stats)) {
    return PathResult{PathResult::Kind::Full, std::move(*word), {}};
  }
  if (auto hold = safe_hold(env, req.agent, req.pos, req.table, *req.phi, req.order, req.rng)) {
    return PathResult{PathResult::Kind::Hold, std::move(*hold), {}};
  }
  return escape(env, req.agent, req.pos, req.positions, *req.members, *req.order, req.table,
                req.escape_avoid_mask);
}

}  // namespace mas
