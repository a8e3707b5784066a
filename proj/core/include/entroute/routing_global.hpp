#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "entroute/mc_engine.hpp"
#include "entroute/topology.hpp"

namespace entroute {

/// Edge-disjoint Alice-to-Bob paths in discovery order.
struct PathSet {
  std::vector<std::vector<EdgeId>> paths;  // each listed from Alice to Bob

  bool empty() const noexcept { return paths.empty(); }
  std::size_t size() const noexcept { return paths.size(); }
  std::vector<std::size_t> lengths() const;
};

/// Breadth-first search over up edges with reusable scratch space.
///
/// Neighbors are expanded in ascending node id, so among equal-length
/// shortest paths the search deterministically keeps the first discovered.
class PathFinder {
 public:
  explicit PathFinder(const Topology& topology);

  /// Greedy edge-disjoint routing: take a shortest path, prune its edges,
  /// repeat until Alice and Bob disconnect.
  PathSet greedy(const LinkInstance& links, NodeId alice, NodeId bob);

  /// Hop count of a shortest up-edge path, or nullopt when disconnected.
  std::optional<std::size_t> shortest_length(const LinkInstance& links, NodeId alice, NodeId bob);

 private:
  bool search(const LinkInstance& links, NodeId alice, NodeId bob, bool honor_pruning);

  const Topology* topology_;
  std::vector<std::uint64_t> seen_;
  std::vector<EdgeId> parent_edge_;
  std::vector<std::uint64_t> pruned_;
  std::vector<NodeId> queue_;
  std::uint64_t search_stamp_ = 0;
  std::uint64_t route_stamp_ = 0;
};

PathSet greedy_route(const LinkInstance& links, const Topology& topology, NodeId alice, NodeId bob);

/// Sum over paths of q^(k_i - 1); zero for an empty set.
double instance_rate_global(const PathSet& paths, double q);

/// Most edge-disjoint paths any rule can use between the pair.
std::size_t max_disjoint_paths(const Topology& topology, NodeId alice, NodeId bob);

/// Greedy rate and the optimal-rule upper bound evaluated on shared instances.
struct GlobalRates {
  RateEstimate greedy;       // R_g
  RateEstimate optimal_ub;   // E[m q^(n_SP - 1)], m = min(deg A, deg B)
};

GlobalRates estimate_global_rates(const Topology& topology, const SimParams& params, NodeId alice,
                                  NodeId bob);
RateEstimate estimate_R_g(const Topology& topology, const SimParams& params, NodeId alice, NodeId bob);
RateEstimate estimate_R_opt_UB(const Topology& topology, const SimParams& params, NodeId alice,
                               NodeId bob);

struct ShortestPathStats {
  RateEstimate weight;        // E[q^(n_SP - 1)], zero when disconnected
  RateEstimate disconnected;  // Pr[no up-edge path]
  RateEstimate length;        // E[n_SP * 1{connected}]; divide by Pr[connected] for the conditional mean
};

ShortestPathStats shortest_path_length_stat(const Topology& topology, const SimParams& params,
                                            NodeId alice, NodeId bob);

}  // namespace entroute
