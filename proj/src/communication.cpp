#include "mas/communication.hpp"

#include <algorithm>
#include <numeric>

namespace mas {

std::vector<CommGroup> comm_groups(const Environment& env, std::span<const VertexId> positions,
                                   int comm_dist) {
  const int n = static_cast<int>(positions.size());
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  auto unite = [&](int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); };

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      auto dij = env.try_distance(positions[static_cast<size_t>(i)], positions[static_cast<size_t>(j)]);
      auto dji = env.try_distance(positions[static_cast<size_t>(j)], positions[static_cast<size_t>(i)]);
      int best = std::numeric_limits<int>::max();
      if (dij) best = std::min(best, *dij);
      if (dji) best = std::min(best, *dji);
      if (best <= comm_dist) unite(i, j);
    }
  }

  std::vector<CommGroup> groups;
  std::vector<int> root_index(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (root_index[static_cast<size_t>(r)] == -1) {
      root_index[static_cast<size_t>(r)] = static_cast<int>(groups.size());
      groups.push_back({});
    }
    groups[static_cast<size_t>(root_index[static_cast<size_t>(r)])].members.push_back(i);
  }
  for (auto& g : groups) std::sort(g.members.begin(), g.members.end());
  std::sort(groups.begin(), groups.end(),
            [](const CommGroup& a, const CommGroup& b) { return a.id() < b.id(); });
  return groups;
}

std::vector<SharedView> share_plans(
    const CommGroup& group, std::span<const AgentSnapshot> snapshots, int lookahead,
    const std::function<bool(AgentId owner, AgentId other)>& flag) {
  std::vector<SharedView> views;
  views.reserve(group.members.size());
  for (AgentId viewer : group.members) {
    SharedView view;
    view.viewer = viewer;
    for (AgentId other : group.members) {
      if (other == viewer) continue;
      const AgentSnapshot& snap = snapshots[static_cast<size_t>(other)];
      SharedPlan plan;
      plan.agent = other;
      plan.prefix = {snap.position,
                     std::string(snap.remaining_word.substr(
                         0, static_cast<size_t>(std::max(lookahead, 0))))};
      plan.goal_flag = snap.goal_flag;
      plan.flag_toward_viewer = flag ? flag(other, viewer) : false;
      view.others.push_back(std::move(plan));
    }
    views.push_back(std::move(view));
  }
  return views;
}

}  // namespace mas
