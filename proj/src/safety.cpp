#include "mas/safety.hpp"

#include <algorithm>
#include <charconv>

namespace mas {

Occupancy Occupancy::from_positions(std::span<const VertexId> positions) {
  Occupancy occ;
  for (size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] == kInvalidVertex) continue;
    occ.by_vertex_[positions[i]].push_back(static_cast<AgentId>(i));
    occ.agent_pos_[static_cast<AgentId>(i)] = positions[i];
  }
  return occ;
}

Occupancy Occupancy::from_map(const std::map<VertexId, std::vector<AgentId>>& by_vertex) {
  Occupancy occ;
  for (const auto& [v, agents] : by_vertex) {
    for (AgentId a : agents) {
      auto [it, inserted] = occ.agent_pos_.emplace(a, v);
      if (!inserted) {
        throw InconsistentOccupancy("agent " + std::to_string(a) + " occupies two vertices");
      }
      occ.by_vertex_[v].push_back(a);
    }
  }
  for (auto& [v, agents] : occ.by_vertex_) std::sort(agents.begin(), agents.end());
  return occ;
}

VertexId Occupancy::position_of(AgentId a) const {
  auto it = agent_pos_.find(a);
  return it == agent_pos_.end() ? kInvalidVertex : it->second;
}

std::vector<AgentId> Occupancy::agents() const {
  std::vector<AgentId> out;
  out.reserve(agent_pos_.size());
  for (const auto& [a, v] : agent_pos_) out.push_back(a);
  return out;
}

Occupancy Occupancy::restricted_to(std::span<const AgentId> keep) const {
  Occupancy occ;
  for (AgentId a : keep) {
    auto it = agent_pos_.find(a);
    if (it == agent_pos_.end()) continue;
    occ.agent_pos_.emplace(a, it->second);
    occ.by_vertex_[it->second].push_back(a);
  }
  for (auto& [v, agents] : occ.by_vertex_) std::sort(agents.begin(), agents.end());
  return occ;
}

SafetyFn SafetyFn::parse(const std::string& name, const Environment& env) {
  if (name.empty() || name == "collision") return SafetyFn("collision", Kind::Collision, 0, &env);
  if (name == "collision+swap") return SafetyFn(name, Kind::CollisionSwap, 0, &env);
  constexpr std::string_view prefix = "min-distance:";
  if (name.rfind(prefix, 0) == 0) {
    int r = 0;
    auto [ptr, ec] = std::from_chars(name.data() + prefix.size(), name.data() + name.size(), r);
    if (ec != std::errc() || ptr != name.data() + name.size() || r < 1) {
      throw ConfigError("bad min-distance radius in safety name: " + name);
    }
    return SafetyFn(name, Kind::MinDistance, r, &env);
  }
  throw ConfigError("unknown safety function: " + name);
}

std::optional<SafetyViolation> SafetyFn::check(const Occupancy& occ) const {
  for (const auto& [v, agents] : occ.by_vertex()) {
    if (agents.size() > 1) return SafetyViolation{agents, v};
  }
  if (kind_ == Kind::MinDistance) {
    const auto agents = occ.agents();
    for (size_t i = 0; i < agents.size(); ++i) {
      for (size_t j = i + 1; j < agents.size(); ++j) {
        VertexId a = occ.position_of(agents[i]);
        VertexId b = occ.position_of(agents[j]);
        auto d = env_->try_distance(a, b);
        if (d && *d < min_sep_) {
          return SafetyViolation{{agents[i], agents[j]}, std::min(a, b)};
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<SafetyViolation> SafetyFn::check_transition(const Occupancy& prev,
                                                          const Occupancy& next) const {
  if (kind_ != Kind::CollisionSwap) return std::nullopt;
  const auto agents = prev.agents();
  for (size_t i = 0; i < agents.size(); ++i) {
    for (size_t j = i + 1; j < agents.size(); ++j) {
      VertexId pi = prev.position_of(agents[i]), pj = prev.position_of(agents[j]);
      VertexId ni = next.position_of(agents[i]), nj = next.position_of(agents[j]);
      if (ni == kInvalidVertex || nj == kInvalidVertex) continue;
      if (pi != pj && ni == pj && nj == pi) {
        return SafetyViolation{{agents[i], agents[j]}, std::min(pi, pj)};
      }
    }
  }
  return std::nullopt;
}

bool phi_collision(const Occupancy& occ) {
  for (const auto& [v, agents] : occ.by_vertex()) {
    if (agents.size() > 1) return false;
  }
  return true;
}

bool phi_local(const std::vector<std::vector<AgentId>>& groups, const Occupancy& occ,
               const SafetyFn& phi) {
  for (const auto& group : groups) {
    if (!phi.holds(occ.restricted_to(group))) return false;
  }
  return true;
}

bool phi_bar(AgentId u, std::span<const int> rank_of, const Occupancy& occ, const SafetyFn& phi) {
  std::vector<AgentId> keep;
  for (AgentId a : occ.agents()) {
    if (a == u || rank_of[static_cast<size_t>(a)] >= rank_of[static_cast<size_t>(u)]) {
      keep.push_back(a);
    }
  }
  return phi.holds(occ.restricted_to(keep));
}

std::optional<JointViolation> joint_check(const Environment& env,
                                          std::span<const Trajectory> trajs, const SafetyFn& phi) {
  std::vector<std::vector<VertexId>> paths;
  size_t horizon = 0;
  paths.reserve(trajs.size());
  for (const Trajectory& t : trajs) {
    paths.push_back(positions(env, t));
    horizon = std::max(horizon, t.word.size());
  }
  std::vector<VertexId> at(trajs.size());
  std::optional<Occupancy> prev;
  for (size_t time = 0; time <= horizon; ++time) {
    for (size_t i = 0; i < paths.size(); ++i) {
      at[i] = paths[i][std::min(time, paths[i].size() - 1)];
    }
    Occupancy occ = Occupancy::from_positions(at);
    if (auto bad = phi.check(occ)) {
      return JointViolation{static_cast<int>(time), bad->agents, bad->vertex};
    }
    if (prev) {
      if (auto bad = phi.check_transition(*prev, occ)) {
        return JointViolation{static_cast<int>(time), bad->agents, bad->vertex};
      }
    }
    prev = std::move(occ);
  }
  return std::nullopt;
}

}  // namespace mas
