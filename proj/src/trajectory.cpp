#include "mas/trajectory.hpp"

#include <stdexcept>

namespace mas {

VertexId final_state(const Environment& env, const Trajectory& traj) {
  return env.run_word(traj.start, traj.word);
}

Trajectory sub_trajectory(const Environment& env, const Trajectory& traj, std::size_t i,
                          std::size_t j) {
  if (i > j || j > traj.word.size()) {
    throw std::out_of_range("sub_trajectory indices [" + std::to_string(i) + "," +
                            std::to_string(j) + ") out of range for word of length " +
                            std::to_string(traj.word.size()));
  }
  VertexId start = env.run_word(traj.start, std::string_view(traj.word).substr(0, i));
  return {start, traj.word.substr(i, j - i)};
}

std::vector<VertexId> positions(const Environment& env, const Trajectory& traj) {
  std::vector<VertexId> out;
  out.reserve(traj.word.size() + 1);
  out.push_back(traj.start);
  VertexId cur = traj.start;
  for (size_t i = 0; i < traj.word.size(); ++i) {
    auto to = env.try_step(cur, traj.word[i]);
    if (!to) {
      throw NoSuchEdge(cur, traj.word[i], i,
                       "trajectory word invalid at offset " + std::to_string(i));
    }
    cur = *to;
    out.push_back(cur);
  }
  return out;
}

std::vector<std::string> split_blocks(std::string_view word, int lookahead) {
  if (lookahead < 1) throw ConfigError("lookahead must be >= 1");
  std::vector<std::string> blocks;
  for (size_t i = 0; i < word.size(); i += static_cast<size_t>(lookahead)) {
    blocks.emplace_back(word.substr(i, static_cast<size_t>(lookahead)));
  }
  return blocks;
}

PlanCursor PlanCursor::begin(const Environment& env, VertexId start, std::string full_word,
                             int lookahead) {
  if (lookahead < 1) throw ConfigError("lookahead must be >= 1");
  PlanCursor cur;
  cur.full_word = std::move(full_word);
  cur.lookahead = lookahead;
  cur.block_index = 0;
  cur.current_block = {start, cur.full_word.substr(0, static_cast<size_t>(lookahead))};
  cur.block_goal = final_state(env, cur.current_block);
  return cur;
}

bool PlanCursor::exhausted() const {
  // Blocks are nonempty slices of the plan, so an empty current block means
  // the slice started past the end of the word.
  return current_block.word.empty();
}

PlanCursor PlanCursor::advanced(const Environment& env) const {
  PlanCursor next = *this;
  next.block_index = block_index + 1;
  size_t from = next.block_index * static_cast<size_t>(lookahead);
  VertexId start = block_goal;
  if (from >= full_word.size()) {
    next.current_block = {start, ""};
    next.block_goal = start;
  } else {
    next.current_block = {start, full_word.substr(from, static_cast<size_t>(lookahead))};
    next.block_goal = final_state(env, next.current_block);
  }
  return next;
}

}  // namespace mas
