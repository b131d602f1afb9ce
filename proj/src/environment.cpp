#include "mas/environment.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mas {

namespace {

// Bridge detection on the undirected simple graph (self-loops ignored).
// Iterative lowlink DFS; returns true iff connected with no bridges.
bool two_edge_connected_undirected(int n, const std::vector<std::set<int>>& und) {
  if (n <= 1) return true;
  std::vector<int> disc(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0);
  int timer = 0;
  struct Frame {
    int v;
    int parent_edge_to;  // vertex we arrived from, -1 at root
    std::set<int>::const_iterator it;
    bool skipped_parent = false;
  };
  std::vector<Frame> stack;
  disc[0] = low[0] = timer++;
  stack.push_back({0, -1, und[0].begin()});
  bool bridge = false;
  while (!stack.empty() && !bridge) {
    Frame& f = stack.back();
    if (f.it == und[static_cast<size_t>(f.v)].end()) {
      int v = f.v, p = f.parent_edge_to;
      stack.pop_back();
      if (p >= 0) {
        low[static_cast<size_t>(p)] = std::min(low[static_cast<size_t>(p)], low[static_cast<size_t>(v)]);
        if (low[static_cast<size_t>(v)] > disc[static_cast<size_t>(p)]) bridge = true;
      }
      continue;
    }
    int to = *f.it++;
    if (to == f.parent_edge_to && !f.skipped_parent) {
      // One parallel edge back to the parent is the tree edge itself.
      f.skipped_parent = true;
      continue;
    }
    if (disc[static_cast<size_t>(to)] != -1) {
      low[static_cast<size_t>(f.v)] = std::min(low[static_cast<size_t>(f.v)], disc[static_cast<size_t>(to)]);
    } else {
      disc[static_cast<size_t>(to)] = low[static_cast<size_t>(to)] = timer++;
      stack.push_back({to, f.v, und[static_cast<size_t>(to)].begin()});
    }
  }
  if (bridge) return false;
  return std::all_of(disc.begin(), disc.end(), [](int d) { return d != -1; });
}

}  // namespace

Environment Environment::grid(GridSpec spec) {
  if (spec.width < 1 || spec.height < 1) throw ConfigError("grid dimensions must be >= 1");
  Environment env;
  env.grid_ = true;
  env.width_ = spec.width;
  env.height_ = spec.height;
  env.actions_ = "lrtds";
  const int w = spec.width, h = spec.height;
  env.adjacency_.resize(static_cast<size_t>(w) * static_cast<size_t>(h));
  env.names_.resize(env.adjacency_.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      VertexId v = static_cast<VertexId>(y * w + x);
      auto& edges = env.adjacency_[static_cast<size_t>(v)];
      if (x > 0) edges.push_back({'l', v - 1});
      if (x + 1 < w) edges.push_back({'r', v + 1});
      if (y + 1 < h) edges.push_back({'t', v + w});
      if (y > 0) edges.push_back({'d', v - w});
      edges.push_back({'s', v});
      env.names_[static_cast<size_t>(v)] = std::to_string(x) + "," + std::to_string(y);
    }
  }
  env.index_names();
  env.compute_two_edge_connectivity();
  return env;
}

Environment Environment::from_edge_list(std::istream& in) {
  struct RawEdge {
    std::string src, dst;
    char action;
  };
  std::vector<RawEdge> raw;
  std::vector<std::string> order;  // vertex names in first-seen order
  std::set<std::string> seen;
  std::set<char> action_set;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string src, act, dst;
    if (!(ls >> src)) continue;
    if (src[0] == '#') continue;
    if (!(ls >> act >> dst)) {
      throw ConfigError("edge list line " + std::to_string(lineno) + ": expected `src action dst`");
    }
    if (act.size() != 1) {
      throw ConfigError("edge list line " + std::to_string(lineno) +
                        ": action must be a single character, got `" + act + "`");
    }
    for (const auto& name : {src, dst}) {
      if (seen.insert(name).second) order.push_back(name);
    }
    action_set.insert(act[0]);
    raw.push_back({src, dst, act[0]});
  }
  if (order.empty()) throw ConfigError("edge list defines no vertices");

  Environment env;
  env.names_ = order;
  env.adjacency_.resize(order.size());
  env.index_names();

  // Canonical action order: sorted, idle last.
  env.actions_.assign(action_set.begin(), action_set.end());
  if (auto pos = env.actions_.find('s'); pos != std::string::npos) {
    env.actions_.erase(pos, 1);
    env.actions_ += 's';
  }

  std::map<std::pair<VertexId, char>, VertexId> delta;
  for (const auto& e : raw) {
    VertexId s = env.name_to_id_.at(e.src);
    VertexId d = env.name_to_id_.at(e.dst);
    auto [it, inserted] = delta.emplace(std::make_pair(s, e.action), d);
    if (!inserted && it->second != d) {
      throw ConfigError("nondeterministic edge: (" + e.src + ", " + std::string(1, e.action) +
                        ") maps to both " + env.names_[static_cast<size_t>(it->second)] + " and " + e.dst);
    }
  }
  for (size_t v = 0; v < env.names_.size(); ++v) {
    auto it = delta.find({static_cast<VertexId>(v), 's'});
    if (it == delta.end() || it->second != static_cast<VertexId>(v)) {
      throw ConfigError("vertex `" + env.names_[v] + "` lacks an idle self-loop (s)");
    }
  }
  for (const auto& [key, dst] : delta) {
    env.adjacency_[static_cast<size_t>(key.first)].push_back({key.second, dst});
  }
  for (auto& edges : env.adjacency_) {
    std::sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
      return env.actions_.find(a.action) < env.actions_.find(b.action);
    });
  }

  env.compute_two_edge_connectivity();
  if (!env.two_edge_connected_) {
    throw ConfigError("graph is not 2-edge-connected");
  }

  // All-pairs BFS distances over directed edges.
  const int n = env.vertex_count();
  env.dist_.assign(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n), -1));
  for (int s = 0; s < n; ++s) {
    auto& dist = env.dist_[static_cast<size_t>(s)];
    dist[static_cast<size_t>(s)] = 0;
    std::deque<VertexId> queue{static_cast<VertexId>(s)};
    while (!queue.empty()) {
      VertexId v = queue.front();
      queue.pop_front();
      for (const Edge& e : env.adjacency_[static_cast<size_t>(v)]) {
        if (e.to == v) continue;
        if (dist[static_cast<size_t>(e.to)] == -1) {
          dist[static_cast<size_t>(e.to)] = dist[static_cast<size_t>(v)] + 1;
          queue.push_back(e.to);
        }
      }
    }
  }
  return env;
}

Environment Environment::from_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path);
  return from_edge_list(in);
}

void Environment::index_names() {
  name_to_id_.clear();
  for (size_t i = 0; i < names_.size(); ++i) {
    name_to_id_.emplace(names_[i], static_cast<VertexId>(i));
  }
}

void Environment::compute_two_edge_connectivity() {
  const int n = vertex_count();
  std::vector<std::set<int>> und(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) {
    for (const Edge& e : adjacency_[static_cast<size_t>(v)]) {
      if (e.to == v) continue;
      und[static_cast<size_t>(v)].insert(e.to);
      und[static_cast<size_t>(e.to)].insert(v);
    }
  }
  two_edge_connected_ = two_edge_connected_undirected(n, und);
}

VertexId Environment::vertex_at(int x, int y) const {
  if (!grid_ || x < 0 || x >= width_ || y < 0 || y >= height_) {
    throw ConfigError("vertex (" + std::to_string(x) + "," + std::to_string(y) + ") outside grid");
  }
  return static_cast<VertexId>(y * width_ + x);
}

std::pair<int, int> Environment::coords(VertexId v) const {
  return {static_cast<int>(v) % width_, static_cast<int>(v) / width_};
}

std::optional<VertexId> Environment::find_vertex(std::string_view name) const {
  auto it = name_to_id_.find(std::string(name));
  if (it == name_to_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<VertexId> Environment::try_step(VertexId v, char action) const {
  for (const Edge& e : adjacency_[static_cast<size_t>(v)]) {
    if (e.action == action) return e.to;
  }
  return std::nullopt;
}

VertexId Environment::step(VertexId v, char action) const {
  if (auto to = try_step(v, action)) return *to;
  throw NoSuchEdge(v, action, 0,
                   "no edge (" + vertex_name(v) + ", " + std::string(1, action) + ")");
}

VertexId Environment::run_word(VertexId v, std::string_view word) const {
  VertexId cur = v;
  for (size_t i = 0; i < word.size(); ++i) {
    auto to = try_step(cur, word[i]);
    if (!to) {
      throw NoSuchEdge(cur, word[i], i,
                       "no edge (" + vertex_name(cur) + ", " + std::string(1, word[i]) +
                           ") at word offset " + std::to_string(i));
    }
    cur = *to;
  }
  return cur;
}

std::optional<int> Environment::try_distance(VertexId from, VertexId to) const {
  if (grid_) {
    auto [x1, y1] = coords(from);
    auto [x2, y2] = coords(to);
    return std::abs(x1 - x2) + std::abs(y1 - y2);
  }
  int d = dist_[static_cast<size_t>(from)][static_cast<size_t>(to)];
  if (d < 0) return std::nullopt;
  return d;
}

int Environment::graph_distance(VertexId from, VertexId to) const {
  if (auto d = try_distance(from, to)) return *d;
  throw Unreachable(from, to, "no path from " + vertex_name(from) + " to " + vertex_name(to));
}

}  // namespace mas
