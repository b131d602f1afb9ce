#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "mas/types.hpp"

namespace mas {

// Thrown when a (vertex, action) pair has no outgoing edge, e.g. a plan that
// walks off the grid. `offset` is the failing index inside the word (0 for a
// single step).
struct NoSuchEdge : std::runtime_error {
  NoSuchEdge(VertexId from, char action, std::size_t offset, const std::string& what)
      : std::runtime_error(what), from(from), action(action), offset(offset) {}
  VertexId from;
  char action;
  std::size_t offset;
};

struct Unreachable : std::runtime_error {
  Unreachable(VertexId from, VertexId to, const std::string& what)
      : std::runtime_error(what), from(from), to(to) {}
  VertexId from;
  VertexId to;
};

struct InconsistentOccupancy : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag state with a cycle in the strict pairwise order. Unreachable under the
// ordering mechanism; indicates corrupted state.
struct CyclicFlags : std::logic_error {
  using std::logic_error::logic_error;
};

// No unoccupied vertex is reachable in the occupancy graph: the connected
// region is over-saturated with agents.
struct NoEscape : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooManyAgents : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InstanceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mas
