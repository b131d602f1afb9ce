#include <doctest.h>

#include <functional>
#include <random>
#include <set>

#include "mas/pathfinder.hpp"
#include "mas/trajectory.hpp"

using namespace mas;

namespace {

PriorityOrder order_of(const std::vector<AgentId>& ascending, int n) {
  PriorityOrder order;
  order.ascending = ascending;
  order.rank_of.assign(static_cast<size_t>(n), -1);
  for (size_t i = 0; i < ascending.size(); ++i) {
    order.rank_of[static_cast<size_t>(ascending[i])] = static_cast<int>(i);
  }
  return order;
}

// Exhaustive enumeration of all move-only words of length within [dist,
// dist+k] that reach the goal, avoid the reservations, and stay clear of the
// goal cell afterwards; completeness oracle for the BFS.
bool brute_force_exists(const Environment& env, AgentId u, VertexId start, VertexId goal,
                        const ReservationTable& table, int k) {
  int dist = env.graph_distance(start, goal);
  std::function<bool(VertexId, int)> go = [&](VertexId v, int t) -> bool {
    if (v == goal && t >= dist) {
      bool parked = true;
      for (int tt = t + 1; tt <= table.horizon(); ++tt) {
        if (table.reserved_by_other(goal, tt, u)) {
          parked = false;
          break;
        }
      }
      if (parked) return true;
    }
    if (t == dist + k) return false;
    for (const auto& e : env.edges_from(v)) {
      if (e.action == 's') continue;
      if (table.reserved_by_other(e.to, t + 1, u)) continue;
      if (go(e.to, t + 1)) return true;
    }
    return false;
  };
  return go(start, 0);
}

}  // namespace

TEST_CASE("reservation table: block prefix plus padding") {
  Environment env = Environment::grid({5, 5});
  const int lookahead = 3, k = 2;
  ReservationTable table(2, lookahead + k);
  table.commit(env, 1, env.vertex_at(2, 4), "ddd");  // green

  auto entries = table.entries();
  std::set<std::tuple<VertexId, int, AgentId>> expect = {
      {env.vertex_at(2, 4), 0, 1}, {env.vertex_at(2, 3), 1, 1}, {env.vertex_at(2, 2), 2, 1},
      {env.vertex_at(2, 1), 3, 1}, {env.vertex_at(2, 1), 4, 1}, {env.vertex_at(2, 1), 5, 1}};
  CHECK(std::set(entries.begin(), entries.end()) == expect);
  CHECK(table.future_entry_count() == 5);  // offsets 1..5
  CHECK(table.reserved_by_other(env.vertex_at(2, 2), 2, 0));
  CHECK_FALSE(table.reserved_by_other(env.vertex_at(2, 2), 3, 0));
  CHECK_FALSE(table.reserved_by_other(env.vertex_at(2, 2), 2, 1));  // own entries masked
  CHECK(table.reserved_by_other(env.vertex_at(2, 1), 99, 0));       // clamped past horizon

  table.release(1);
  CHECK(table.entries().empty());
  CHECK(table.future_entry_count() == 0);
}

TEST_CASE("reservations_above covers exactly the higher-ranked members") {
  Environment env = Environment::grid({5, 5});
  std::vector<AgentSnapshot> snaps(2);
  snaps[0] = {env.vertex_at(4, 2), "lll", false};
  snaps[1] = {env.vertex_at(2, 4), "ddd", false};
  CommGroup group{{0, 1}};
  auto views = share_plans(group, snaps, 3, nullptr);
  auto order = order_of({0, 1}, 2);

  ReservationTable for_blue = reservations_above(env, 0, views, order, 3, 2);
  CHECK(for_blue.committed_agents() == std::vector<AgentId>{1});
  CHECK(for_blue.future_entry_count() == 5);

  // The top agent sees an empty table.
  ReservationTable for_green = reservations_above(env, 1, views, order, 3, 2);
  CHECK(for_green.committed_agents().empty());
  CHECK(for_green.future_entry_count() == 0);

  // Bound: never more than (lookahead+k) * |group| future entries.
  CHECK(for_blue.future_entry_count() <= (3 + 2) * 2);
}

TEST_CASE("find_safe_path solves the two-agent grid scenario") {
  Environment env = Environment::grid({5, 5});
  SafetyFn phi = SafetyFn::parse("collision", env);
  auto order = order_of({0, 1}, 2);
  ReservationTable table(2, 5);
  table.commit(env, 1, env.vertex_at(2, 4), "ddd");

  SearchStats stats;
  auto word = find_safe_path(env, 0, env.vertex_at(4, 2), env.vertex_at(1, 2), &table, phi, 2,
                             &order, &stats);
  REQUIRE(word.has_value());
  CHECK(word->size() == 5);  // dist 3 is blocked and parity rules out 4
  CHECK(stats.expanded > 0);
  CHECK(env.run_word(env.vertex_at(4, 2), *word) == env.vertex_at(1, 2));

  // The produced joint motion is safe; "ltlld" is another admissible answer.
  std::vector<Trajectory> joint = {{env.vertex_at(4, 2), *word}, {env.vertex_at(2, 4), "ddd"}};
  CHECK(joint_safe(env, joint, phi));
  std::vector<Trajectory> alt = {{env.vertex_at(4, 2), "ltlld"}, {env.vertex_at(2, 4), "ddd"}};
  CHECK(joint_safe(env, alt, phi));

  // Canonical l<r<t<d tie-break output, pinned.
  CHECK(*word == "lrlll");
}

TEST_CASE("find_safe_path without reservations returns a shortest word") {
  Environment env = Environment::grid({7, 7});
  SafetyFn phi = SafetyFn::parse("collision", env);
  auto word =
      find_safe_path(env, 0, env.vertex_at(1, 1), env.vertex_at(5, 3), nullptr, phi, 0, nullptr);
  REQUIRE(word.has_value());
  CHECK(word->size() == 6);  // Manhattan distance
  CHECK(env.run_word(env.vertex_at(1, 1), *word) == env.vertex_at(5, 3));
}

TEST_CASE("find_safe_path returns NotFound in a blocked corridor") {
  Environment env = Environment::grid({5, 1});
  SafetyFn phi = SafetyFn::parse("collision", env);
  auto order = order_of({0, 1}, 2);
  ReservationTable table(2, 3 + 2);
  table.commit(env, 1, env.vertex_at(2, 0), "");  // parked higher-priority agent

  auto word =
      find_safe_path(env, 0, env.vertex_at(0, 0), env.vertex_at(4, 0), &table, phi, 2, &order);
  CHECK_FALSE(word.has_value());
  CHECK(brute_force_exists(env, 0, env.vertex_at(0, 0), env.vertex_at(4, 0), table, 2) ==
        word.has_value());
}

TEST_CASE("search agrees with brute-force enumeration on random small instances") {
  Environment env = Environment::grid({4, 4});
  SafetyFn phi = SafetyFn::parse("collision", env);
  std::mt19937_64 rng(7);
  int found = 0, missing = 0;
  for (int trial = 0; trial < 80; ++trial) {
    VertexId start = static_cast<VertexId>(rng() % 16);
    VertexId goal = static_cast<VertexId>(rng() % 16);
    int k = static_cast<int>(rng() % 3);
    ReservationTable table(3, env.graph_distance(start, goal) + k);
    auto order = order_of({0, 1, 2}, 3);
    for (AgentId m = 1; m <= 2; ++m) {
      VertexId v = static_cast<VertexId>(rng() % 16);
      std::string walk;
      VertexId w = v;
      for (int s = 0; s < 3; ++s) {
        auto edges = env.edges_from(w);
        const auto& e = edges[rng() % edges.size()];
        walk.push_back(e.action);
        w = e.to;
      }
      table.commit(env, m, v, walk);
    }
    auto word = find_safe_path(env, 0, start, goal, &table, phi, k, &order);
    bool brute = brute_force_exists(env, 0, start, goal, table, k);
    CHECK(word.has_value() == brute);
    (word ? found : missing) += 1;
    if (word) {
      int dist = env.graph_distance(start, goal);
      CHECK(static_cast<int>(word->size()) >= dist);
      CHECK(static_cast<int>(word->size()) <= dist + k);
      // Replaying the word against the reservations keeps every instant clear.
      VertexId v = start;
      for (size_t t = 0; t < word->size(); ++t) {
        v = env.step(v, (*word)[t]);
        CHECK_FALSE(table.reserved_by_other(v, static_cast<int>(t) + 1, 0));
      }
      CHECK(v == goal);
    }
  }
  CHECK(found > 0);
  CHECK(missing > 0);
}

TEST_CASE("swap-aware search refuses to cross a reserved agent") {
  Environment env = Environment::grid({3, 1});
  auto order = order_of({0, 1}, 2);
  ReservationTable table(2, 3);
  table.commit(env, 1, env.vertex_at(1, 0), "l");  // heading into (0,0)

  SafetyFn plain = SafetyFn::parse("collision", env);
  auto crossing =
      find_safe_path(env, 0, env.vertex_at(0, 0), env.vertex_at(2, 0), &table, plain, 1, &order);
  REQUIRE(crossing.has_value());
  CHECK(*crossing == "rr");  // vertex conflicts only: crossing is legal

  SafetyFn swap = SafetyFn::parse("collision+swap", env);
  auto blocked =
      find_safe_path(env, 0, env.vertex_at(0, 0), env.vertex_at(2, 0), &table, swap, 1, &order);
  CHECK_FALSE(blocked.has_value());
}

TEST_CASE("safe_hold prefers staying put") {
  Environment env = Environment::grid({5, 5});
  SafetyFn phi = SafetyFn::parse("collision", env);
  auto order = order_of({0, 1}, 2);

  ReservationTable clear(2, 4);
  CHECK(safe_hold(env, 0, env.vertex_at(2, 2), &clear, phi, &order) == "s");

  // Own cell invaded at offset 1, left neighbour free.
  ReservationTable invaded(2, 4);
  invaded.commit(env, 1, env.vertex_at(3, 2), "l");  // passes through (2,2)
  CHECK(safe_hold(env, 0, env.vertex_at(2, 2), &invaded, phi, &order) == "l");
}

TEST_CASE("safe_hold with every option reserved triggers the escape tier") {
  Environment env = Environment::grid({3, 3});
  SafetyFn phi = SafetyFn::parse("collision", env);
  std::vector<AgentId> members = {0, 1, 2, 3, 4, 5};
  auto order = order_of({0, 1, 2, 3, 4, 5}, 6);
  ReservationTable table(6, 4);
  table.commit(env, 1, env.vertex_at(1, 2), "d");  // invades (1,1)
  table.commit(env, 2, env.vertex_at(1, 0), "s");  // parks below
  table.commit(env, 3, env.vertex_at(0, 1), "s");  // parks left
  table.commit(env, 4, env.vertex_at(2, 1), "s");  // parks right
  table.commit(env, 5, env.vertex_at(0, 2), "r");  // moves onto (1,2)
  CHECK_FALSE(safe_hold(env, 0, env.vertex_at(1, 1), &table, phi, &order).has_value());
}

TEST_CASE("escape pushes a chain toward the free cell") {
  Environment env = Environment::grid({4, 1});
  // u at cell 0, agents at cells 1 and 2, cell 3 free; u ranks highest so no
  // vertex is deleted along the path.
  std::vector<VertexId> pos = {env.vertex_at(0, 0), env.vertex_at(1, 0), env.vertex_at(2, 0)};
  std::vector<AgentId> members = {0, 1, 2};
  auto order = order_of({1, 2, 0}, 3);

  PathResult res = escape(env, 0, pos[0], pos, members, order);
  CHECK(res.kind == PathResult::Kind::Escape);
  CHECK(res.word == "r");
  REQUIRE(res.forced_moves.size() == 2);
  CHECK(res.forced_moves[0] == std::pair<AgentId, char>{1, 'r'});
  CHECK(res.forced_moves[1] == std::pair<AgentId, char>{2, 'r'});
}

TEST_CASE("escape to an adjacent free cell forces nobody") {
  Environment env = Environment::grid({3, 3});
  std::vector<VertexId> pos = {env.vertex_at(1, 1), env.vertex_at(1, 2)};
  std::vector<AgentId> members = {0, 1};
  auto order = order_of({0, 1}, 2);
  PathResult res = escape(env, 0, pos[0], pos, members, order);
  CHECK(res.word.size() == 1);
  CHECK(res.forced_moves.empty());
  // Nearest free vertices tie at distance 1; smallest vertex id wins: (1,0).
  CHECK(env.step(pos[0], res.word[0]) == env.vertex_at(1, 0));
}

TEST_CASE("escape deletes the top agent's vertex") {
  Environment env = Environment::grid({5, 1});
  // u at 1, the top agent parked at 2; the only way out is backwards.
  std::vector<VertexId> pos = {env.vertex_at(1, 0), env.vertex_at(2, 0)};
  std::vector<AgentId> members = {0, 1};
  auto order = order_of({0, 1}, 2);
  PathResult res = escape(env, 0, pos[0], pos, members, order);
  CHECK(res.word == "l");
  CHECK(res.forced_moves.empty());

  // Boxed in behind the top agent with no free cell on this side: NoEscape.
  Environment corridor = Environment::grid({4, 1});
  std::vector<VertexId> boxed = {corridor.vertex_at(1, 0), corridor.vertex_at(2, 0),
                                 corridor.vertex_at(0, 0)};
  std::vector<AgentId> all = {0, 1, 2};
  auto order2 = order_of({0, 2, 1}, 3);  // agent 1 (middle of the corridor) is top
  CHECK_THROWS_AS(escape(corridor, 0, boxed[0], boxed, all, order2), NoEscape);
}

TEST_CASE("pathfind ladder") {
  Environment env = Environment::grid({5, 1});
  SafetyFn phi = SafetyFn::parse("collision", env);
  std::vector<AgentId> members = {0, 1};
  auto order = order_of({0, 1}, 2);
  std::vector<VertexId> pos = {env.vertex_at(0, 0), env.vertex_at(2, 0)};

  ReservationTable table(2, 5);
  table.commit(env, 1, env.vertex_at(2, 0), "");

  PathfindRequest req;
  req.agent = 0;
  req.pos = pos[0];
  req.goal = env.vertex_at(4, 0);
  req.table = &table;
  req.positions = pos;
  req.members = &members;
  req.order = &order;
  req.phi = &phi;
  req.k = 2;

  // Blocked corridor: the full search fails, holding in place works.
  PathResult res = pathfind(env, req);
  CHECK(res.kind == PathResult::Kind::Hold);
  CHECK(res.word == "s");

  // Unconstrained: a full path of exactly the graph distance.
  req.table = nullptr;
  res = pathfind(env, req);
  CHECK(res.kind == PathResult::Kind::Full);
  CHECK(res.word == "rrrr");
}
