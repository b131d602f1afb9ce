#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mas/environment.hpp"
#include "mas/types.hpp"

namespace mas {

/// A trajectory is a start vertex plus an action word inducing a path from it.
struct Trajectory {
  VertexId start = kInvalidVertex;
  std::string word;

  bool operator==(const Trajectory&) const = default;
};

VertexId final_state(const Environment& env, const Trajectory& traj);

/// Half-open slice [i, j) of the word; the result starts where the prefix
/// word[0:i) ends. Throws std::out_of_range unless 0 <= i <= j <= |word|.
Trajectory sub_trajectory(const Environment& env, const Trajectory& traj, std::size_t i,
                          std::size_t j);

/// The |word|+1 vertices visited, starting vertex included.
std::vector<VertexId> positions(const Environment& env, const Trajectory& traj);

/// Consecutive slices of length `lookahead`; the last may be shorter.
/// Concatenation equals the input. The empty word yields no blocks.
std::vector<std::string> split_blocks(std::string_view word, int lookahead);

/// Cursor over an arbitrary-length plan consumed one lookahead-sized block at
/// a time. The current block always reflects the original plan; runtime
/// deviations live outside the cursor.
struct PlanCursor {
  std::string full_word;
  int lookahead = 1;
  std::size_t block_index = 0;
  Trajectory current_block;
  VertexId block_goal = kInvalidVertex;

  static PlanCursor begin(const Environment& env, VertexId start, std::string full_word,
                          int lookahead);

  /// Past the final block: the cursor pins a zero-length trajectory at the
  /// plan's final vertex and the agent idles thereafter.
  bool exhausted() const;

  /// Precondition: the current block's goal has been reached.
  PlanCursor advanced(const Environment& env) const;
};

}  // namespace mas
