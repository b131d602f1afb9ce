#include "mas/oracle.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <unordered_map>

namespace mas {

namespace {

constexpr int kMaxOracleAgents = 3;
constexpr int kMaxOracleVertices = 64;
constexpr int kMaxOracleLookahead = 4;

std::uint32_t encode(std::span<const VertexId> pos) {
  std::uint32_t s = 0;
  for (size_t i = 0; i < pos.size(); ++i) {
    s |= static_cast<std::uint32_t>(pos[i]) << (8 * i);
  }
  return s;
}

}  // namespace

std::optional<std::vector<std::string>> centralized_oracle(const Environment& env,
                                                           std::span<const AgentSpec> agents,
                                                           const SafetyFn& phi, int lookahead,
                                                           int k) {
  const int n = static_cast<int>(agents.size());
  if (n > kMaxOracleAgents || env.vertex_count() > kMaxOracleVertices ||
      lookahead > kMaxOracleLookahead || k > kMaxOracleLookahead) {
    throw InstanceTooLarge("oracle caps: <=3 agents, <=64 vertices, lookahead <= 4");
  }
  const int depth_cap = lookahead + k;

  std::vector<VertexId> start(static_cast<size_t>(n));
  std::vector<VertexId> goal(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    start[static_cast<size_t>(i)] = agents[static_cast<size_t>(i)].start;
    std::string block = agents[static_cast<size_t>(i)].plan.substr(
        0, static_cast<size_t>(lookahead));
    goal[static_cast<size_t>(i)] = env.run_word(agents[static_cast<size_t>(i)].start, block);
  }

  if (!phi.holds(Occupancy::from_positions(start))) return std::nullopt;

  struct Visit {
    std::uint32_t parent;
    std::array<char, kMaxOracleAgents> actions;
    int depth;
  };
  std::unordered_map<std::uint32_t, Visit> visited;
  const std::uint32_t root = encode(start);
  visited.emplace(root, Visit{root, {}, 0});
  std::deque<std::uint32_t> queue{root};

  auto decode = [&](std::uint32_t s) {
    std::vector<VertexId> pos(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pos[static_cast<size_t>(i)] = (s >> (8 * i)) & 0xff;
    return pos;
  };
  auto is_goal = [&](std::span<const VertexId> pos) {
    for (int i = 0; i < n; ++i) {
      if (pos[static_cast<size_t>(i)] != goal[static_cast<size_t>(i)]) return false;
    }
    return true;
  };
  auto reconstruct = [&](std::uint32_t state) {
    std::vector<std::string> words(static_cast<size_t>(n));
    std::uint32_t cur = state;
    while (cur != root) {
      const Visit& v = visited.at(cur);
      for (int i = 0; i < n; ++i) {
        words[static_cast<size_t>(i)].push_back(v.actions[static_cast<size_t>(i)]);
      }
      cur = v.parent;
    }
    for (auto& w : words) std::reverse(w.begin(), w.end());
    return words;
  };

  if (is_goal(start)) return std::vector<std::string>(static_cast<size_t>(n), "");

  while (!queue.empty()) {
    std::uint32_t state = queue.front();
    queue.pop_front();
    const int depth = visited.at(state).depth;
    if (depth == depth_cap) continue;
    std::vector<VertexId> pos = decode(state);

    // Product expansion over every agent's outgoing edges (idle included).
    std::vector<VertexId> next(static_cast<size_t>(n));
    std::array<char, kMaxOracleAgents> acts{};
    std::vector<size_t> idx(static_cast<size_t>(n), 0);
    for (;;) {
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        auto edges = env.edges_from(pos[static_cast<size_t>(i)]);
        if (idx[static_cast<size_t>(i)] >= edges.size()) ok = false;
      }
      if (!ok) break;  // unreachable; loop advances below
      for (int i = 0; i < n; ++i) {
        const auto& e = env.edges_from(pos[static_cast<size_t>(i)])[idx[static_cast<size_t>(i)]];
        next[static_cast<size_t>(i)] = e.to;
        acts[static_cast<size_t>(i)] = e.action;
      }
      std::uint32_t ns = encode(next);
      if (!visited.contains(ns)) {
        Occupancy occ = Occupancy::from_positions(next);
        bool safe = phi.holds(occ);
        if (safe && phi.swap_sensitive()) {
          safe = !phi.check_transition(Occupancy::from_positions(pos), occ).has_value();
        }
        if (safe) {
          visited.emplace(ns, Visit{state, acts, depth + 1});
          if (is_goal(next)) return reconstruct(ns);
          queue.push_back(ns);
        }
      }
      // Advance the mixed-radix counter over per-agent edge indices.
      int carry = n - 1;
      while (carry >= 0) {
        idx[static_cast<size_t>(carry)] += 1;
        if (idx[static_cast<size_t>(carry)] <
            env.edges_from(pos[static_cast<size_t>(carry)]).size()) {
          break;
        }
        idx[static_cast<size_t>(carry)] = 0;
        --carry;
      }
      if (carry < 0) break;
    }
  }
  return std::nullopt;
}

}  // namespace mas
