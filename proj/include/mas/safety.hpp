#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mas/environment.hpp"
#include "mas/trajectory.hpp"
#include "mas/types.hpp"

namespace mas {

/// Instantaneous vertex occupancy: which agents stand where. Consistency
/// (no agent at two vertices) is enforced at construction.
class Occupancy {
 public:
  Occupancy() = default;

  /// positions[i] is agent i's vertex; kInvalidVertex marks absent agents.
  static Occupancy from_positions(std::span<const VertexId> positions);

  /// Raw constructor for explicit vertex -> agents maps; throws
  /// InconsistentOccupancy if an agent appears at two vertices.
  static Occupancy from_map(const std::map<VertexId, std::vector<AgentId>>& by_vertex);

  const std::map<VertexId, std::vector<AgentId>>& by_vertex() const { return by_vertex_; }
  VertexId position_of(AgentId a) const;
  std::vector<AgentId> agents() const;

  Occupancy restricted_to(std::span<const AgentId> keep) const;

 private:
  std::map<VertexId, std::vector<AgentId>> by_vertex_;
  std::map<AgentId, VertexId> agent_pos_;
};

struct SafetyViolation {
  std::vector<AgentId> agents;
  VertexId vertex = kInvalidVertex;
};

/// Named instantaneous safety predicate over occupancies. `collision+swap`
/// additionally rejects pairwise position exchanges between consecutive
/// instants; `min-distance:<r>` requires pairwise graph distance >= r.
class SafetyFn {
 public:
  enum class Kind { Collision, CollisionSwap, MinDistance };

  static SafetyFn parse(const std::string& name, const Environment& env);

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }
  bool swap_sensitive() const { return kind_ == Kind::CollisionSwap; }
  int min_separation() const { return min_sep_; }

  bool holds(const Occupancy& occ) const { return !check(occ).has_value(); }
  std::optional<SafetyViolation> check(const Occupancy& occ) const;

  /// Swap conflicts between two consecutive instants (empty unless swap-aware).
  std::optional<SafetyViolation> check_transition(const Occupancy& prev,
                                                  const Occupancy& next) const;

 private:
  SafetyFn(std::string name, Kind kind, int min_sep, const Environment* env)
      : name_(std::move(name)), kind_(kind), min_sep_(min_sep), env_(env) {}

  std::string name_;
  Kind kind_;
  int min_sep_ = 0;
  const Environment* env_ = nullptr;
};

/// Example-3 collision predicate: at most one agent per vertex.
bool phi_collision(const Occupancy& occ);

/// Conjunction of phi over each group's agents in isolation.
bool phi_local(const std::vector<std::vector<AgentId>>& groups, const Occupancy& occ,
               const SafetyFn& phi);

/// phi restricted to u plus every agent whose rank is at least u's.
/// `rank_of` maps agent id to its priority rank (higher = higher priority);
/// agents absent from the occupancy are ignored.
bool phi_bar(AgentId u, std::span<const int> rank_of, const Occupancy& occ, const SafetyFn& phi);

struct JointViolation {
  int time = 0;
  std::vector<AgentId> agents;
  VertexId vertex = kInvalidVertex;
};

/// Checks phi at every instant of the joint execution; agents whose word has
/// ended are held at their final state. Returns the earliest violation, or
/// nullopt when the system is safe on the trajectories.
std::optional<JointViolation> joint_check(const Environment& env,
                                          std::span<const Trajectory> trajs, const SafetyFn& phi);

inline bool joint_safe(const Environment& env, std::span<const Trajectory> trajs,
                       const SafetyFn& phi) {
  return !joint_check(env, trajs, phi).has_value();
}

}  // namespace mas
