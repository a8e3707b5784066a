#include "entroute/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <utility>

namespace entroute {

Topology::Topology(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != i) {
      throw std::invalid_argument("node ids must be dense and ordered; node at position " +
                                  std::to_string(i) + " has id " +
                                  std::to_string(nodes_[i].id));
    }
  }

  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<std::size_t> degree(nodes_.size(), 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.id != i) {
      throw std::invalid_argument("edge ids must be dense and ordered; edge at position " +
                                  std::to_string(i) + " has id " + std::to_string(e.id));
    }
    if (e.u >= nodes_.size() || e.v >= nodes_.size()) {
      throw std::invalid_argument("edge " + std::to_string(e.id) + " references a missing node");
    }
    if (e.u == e.v) {
      throw std::invalid_argument("edge " + std::to_string(e.id) + " is a self-loop");
    }
    if (e.multiplicity < 1) {
      throw std::invalid_argument("edge " + std::to_string(e.id) + " has multiplicity < 1");
    }
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
      throw std::invalid_argument("duplicate edge between nodes " + std::to_string(e.u) +
                                  " and " + std::to_string(e.v));
    }
    ++degree[e.u];
    ++degree[e.v];
  }

  offsets_.assign(nodes_.size() + 1, 0);
  for (std::size_t n = 0; n < nodes_.size(); ++n) offsets_[n + 1] = offsets_[n] + degree[n];
  incidence_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    incidence_[fill[e.u]++] = {e.id, e.v};
    incidence_[fill[e.v]++] = {e.id, e.u};
  }
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    std::sort(incidence_.begin() + static_cast<std::ptrdiff_t>(offsets_[n]),
              incidence_.begin() + static_cast<std::ptrdiff_t>(offsets_[n + 1]),
              [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
  }
}

std::optional<NodeId> Topology::find(Coord c) const {
  if (grid_dims_) {
    const auto [w, h] = *grid_dims_;
    if (c.x < 0 || c.y < 0 || c.x >= w || c.y >= h) return std::nullopt;
    return static_cast<NodeId>(c.y * w + c.x);
  }
  for (const Node& n : nodes_) {
    if (n.coord == c) return n.id;
  }
  return std::nullopt;
}

NodeId Topology::at(Coord c) const {
  if (auto id = find(c)) return *id;
  throw std::out_of_range("no node at (" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")");
}

Topology build_grid(int width, int height, int multiplicity) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("grid dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  if (multiplicity < 1) throw std::invalid_argument("grid multiplicity must be positive");

  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      nodes.push_back({static_cast<NodeId>(nodes.size()), {x, y}});
    }
  }

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(width) * (height - 1) +
                static_cast<std::size_t>(height) * (width - 1));
  const auto id = [width](int x, int y) { return static_cast<NodeId>(y * width + x); };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (x + 1 < width) {
        edges.push_back({static_cast<EdgeId>(edges.size()), id(x, y), id(x + 1, y), multiplicity});
      }
      if (y + 1 < height) {
        edges.push_back({static_cast<EdgeId>(edges.size()), id(x, y), id(x, y + 1), multiplicity});
      }
    }
  }

  Topology topology(std::move(nodes), std::move(edges));
  topology.grid_dims_ = std::make_pair(width, height);
  return topology;
}

double l2_distance(Coord a, Coord b) noexcept {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

double l1_distance(Coord a, Coord b) noexcept {
  return static_cast<double>(std::abs(a.x - b.x) + std::abs(a.y - b.y));
}

}  // namespace entroute
