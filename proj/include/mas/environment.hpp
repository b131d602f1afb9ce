#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mas/errors.hpp"
#include "mas/types.hpp"

namespace mas {

struct GridSpec {
  int width = 1;
  int height = 1;
};

/// Static deterministic labeled-graph environment. Vertices are dense ids,
/// edges carry single-character action labels, and every vertex has a
/// self-loop under the distinguished idle action ('s').
///
/// Immutable after construction; safe for concurrent reads.
class Environment {
 public:
  struct Edge {
    char action;
    VertexId to;
  };

  /// 4-connected grid with actions l/r/t/d plus the idle self-loop.
  /// Coordinates are (column, row), (0,0) at the bottom-left; `t` increases y.
  static Environment grid(GridSpec spec);

  /// Custom graph from an edge-list stream: one `src action dst` triple per
  /// line, '#' comments allowed. Actions are single characters with 's'
  /// reserved for idling. Rejects graphs that are nondeterministic, lack idle
  /// self-loops, or are not 2-edge-connected.
  static Environment from_edge_list(std::istream& in);
  static Environment from_edge_list_file(const std::string& path);

  int vertex_count() const { return static_cast<int>(adjacency_.size()); }
  bool is_grid() const { return grid_; }
  int width() const { return width_; }
  int height() const { return height_; }

  VertexId vertex_at(int x, int y) const;
  std::pair<int, int> coords(VertexId v) const;  // grid environments only
  const std::string& vertex_name(VertexId v) const { return names_[static_cast<size_t>(v)]; }
  std::optional<VertexId> find_vertex(std::string_view name) const;

  /// Action alphabet in canonical tie-break order, idle last ("lrtds" on grids).
  const std::string& actions() const { return actions_; }
  char idle_action() const { return 's'; }

  std::span<const Edge> edges_from(VertexId v) const {
    const auto& e = adjacency_[static_cast<size_t>(v)];
    return {e.data(), e.size()};
  }

  std::optional<VertexId> try_step(VertexId v, char action) const;
  VertexId step(VertexId v, char action) const;                 // throws NoSuchEdge
  VertexId run_word(VertexId v, std::string_view word) const;   // throws NoSuchEdge with offset

  /// Length of a shortest directed path. Equals Manhattan distance on grids.
  int graph_distance(VertexId from, VertexId to) const;  // throws Unreachable
  std::optional<int> try_distance(VertexId from, VertexId to) const;

  bool two_edge_connected() const { return two_edge_connected_; }

 private:
  Environment() = default;
  void index_names();
  void compute_two_edge_connectivity();

  std::vector<std::vector<Edge>> adjacency_;
  std::string actions_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, VertexId> name_to_id_;
  bool grid_ = false;
  int width_ = 0;
  int height_ = 0;
  bool two_edge_connected_ = false;
  // All-pairs distances for custom graphs (grids use Manhattan directly).
  std::vector<std::vector<int>> dist_;
};

}  // namespace mas
