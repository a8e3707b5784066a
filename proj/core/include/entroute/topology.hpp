#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace entroute {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Coord {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

struct Node {
  NodeId id = 0;
  Coord coord;
};

/// Undirected physical link between two repeaters carrying `multiplicity`
/// parallel channels.
struct Edge {
  EdgeId id = 0;
  NodeId u = 0;
  NodeId v = 0;
  int multiplicity = 1;

  NodeId other(NodeId n) const noexcept { return n == u ? v : u; }
};

struct Incidence {
  EdgeId edge = 0;
  NodeId neighbor = 0;
};

/// Immutable repeater graph with coordinates and per-node incidence lists.
///
/// Incidence lists are sorted by neighbor id; breadth-first searches rely on
/// that order for deterministic tie-breaking.
class Topology {
 public:
  /// Validates ids (dense, 0-based, in order), endpoints, multiplicities, and
  /// rejects self-loops and parallel edges. Throws std::invalid_argument.
  Topology(std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const Edge& edge(EdgeId id) const { return edges_.at(id); }
  Coord coord(NodeId id) const { return nodes_[id].coord; }

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const Incidence> incident(NodeId n) const noexcept {
    return {incidence_.data() + offsets_[n], incidence_.data() + offsets_[n + 1]};
  }
  std::size_t degree(NodeId n) const noexcept { return offsets_[n + 1] - offsets_[n]; }

  /// Node at `c`, if any (first match for non-injective coordinates).
  std::optional<NodeId> find(Coord c) const;
  NodeId at(Coord c) const;  // throws std::out_of_range

  /// Set for grids produced by build_grid.
  std::optional<std::pair<int, int>> grid_dims() const noexcept { return grid_dims_; }

 private:
  friend Topology build_grid(int width, int height, int multiplicity);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidence_;
  std::optional<std::pair<int, int>> grid_dims_;
};

/// width x height nearest-neighbour lattice; node id = y * width + x.
Topology build_grid(int width, int height, int multiplicity = 1);

double l2_distance(Coord a, Coord b) noexcept;
double l1_distance(Coord a, Coord b) noexcept;

/// {"nodes":[{"id","x","y"}], "edges":[{"id","u","v","S"}]}
std::string topology_to_json(const Topology& topology);
Topology topology_from_json(std::string_view text);

}  // namespace entroute
