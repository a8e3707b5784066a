#include "entroute/routing_global.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace entroute {

namespace {

void check_pair(const Topology& topology, NodeId alice, NodeId bob) {
  if (alice == bob) throw std::invalid_argument("Alice and Bob must be distinct nodes");
  if (alice >= topology.node_count() || bob >= topology.node_count()) {
    throw std::invalid_argument("Alice/Bob node id out of range");
  }
}

}  // namespace

std::vector<std::size_t> PathSet::lengths() const {
  std::vector<std::size_t> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p.size());
  return out;
}

PathFinder::PathFinder(const Topology& topology)
    : topology_(&topology),
      seen_(topology.node_count(), 0),
      parent_edge_(topology.node_count(), 0),
      pruned_(topology.edge_count(), 0) {
  queue_.reserve(topology.node_count());
}

bool PathFinder::search(const LinkInstance& links, NodeId alice, NodeId bob, bool honor_pruning) {
  const std::uint64_t stamp = ++search_stamp_;
  queue_.clear();
  queue_.push_back(alice);
  seen_[alice] = stamp;
  for (std::size_t head = 0; head < queue_.size(); ++head) {
    const NodeId x = queue_[head];
    for (const Incidence& inc : topology_->incident(x)) {
      if (seen_[inc.neighbor] == stamp) continue;
      if (honor_pruning && pruned_[inc.edge] == route_stamp_) continue;
      if (!links.up(inc.edge)) continue;
      seen_[inc.neighbor] = stamp;
      parent_edge_[inc.neighbor] = inc.edge;
      if (inc.neighbor == bob) return true;
      queue_.push_back(inc.neighbor);
    }
  }
  return false;
}

PathSet PathFinder::greedy(const LinkInstance& links, NodeId alice, NodeId bob) {
  PathSet result;
  ++route_stamp_;

  // Unused up edges at either endpoint bound how many more paths can exist;
  // checking them first skips a full-cluster search once one side is spent.
  const auto free_edges = [&](NodeId n) {
    std::size_t count = 0;
    for (const Incidence& inc : topology_->incident(n)) {
      if (pruned_[inc.edge] != route_stamp_ && links.up(inc.edge)) ++count;
    }
    return count;
  };

  while (free_edges(alice) > 0 && free_edges(bob) > 0 && search(links, alice, bob, true)) {
    std::vector<EdgeId> path;
    for (NodeId y = bob; y != alice;) {
      const EdgeId e = parent_edge_[y];
      path.push_back(e);
      pruned_[e] = route_stamp_;
      y = topology_->edge(e).other(y);
    }
    std::reverse(path.begin(), path.end());
    result.paths.push_back(std::move(path));
  }
  return result;
}

std::optional<std::size_t> PathFinder::shortest_length(const LinkInstance& links, NodeId alice,
                                                       NodeId bob) {
  if (!search(links, alice, bob, false)) return std::nullopt;
  std::size_t hops = 0;
  for (NodeId y = bob; y != alice; y = topology_->edge(parent_edge_[y]).other(y)) ++hops;
  return hops;
}

PathSet greedy_route(const LinkInstance& links, const Topology& topology, NodeId alice, NodeId bob) {
  check_pair(topology, alice, bob);
  PathFinder finder(topology);
  return finder.greedy(links, alice, bob);
}

double instance_rate_global(const PathSet& paths, double q) {
  double total = 0.0;
  for (const auto& p : paths.paths) total += std::pow(q, static_cast<double>(p.size()) - 1.0);
  return total;
}

std::size_t max_disjoint_paths(const Topology& topology, NodeId alice, NodeId bob) {
  return std::min(topology.degree(alice), topology.degree(bob));
}

GlobalRates estimate_global_rates(const Topology& topology, const SimParams& params, NodeId alice,
                                  NodeId bob) {
  check_pair(topology, alice, bob);
  const double cap = static_cast<double>(max_disjoint_paths(topology, alice, bob));
  const double q = params.q;
  auto factory = [&]() -> TrialFn {
    auto finder = std::make_shared<PathFinder>(topology);
    return [finder, alice, bob, cap, q](const Trial& trial, std::span<double> out) {
      const PathSet paths = finder->greedy(trial.links, alice, bob);
      if (paths.empty()) return;
      out[0] = instance_rate_global(paths, q);
      out[1] = cap * std::pow(q, static_cast<double>(paths.paths.front().size()) - 1.0);
    };
  };
  const auto est = run_trials(topology, params, 2, factory);
  return {est[0], est[1]};
}

RateEstimate estimate_R_g(const Topology& topology, const SimParams& params, NodeId alice,
                          NodeId bob) {
  return estimate_global_rates(topology, params, alice, bob).greedy;
}

RateEstimate estimate_R_opt_UB(const Topology& topology, const SimParams& params, NodeId alice,
                               NodeId bob) {
  return estimate_global_rates(topology, params, alice, bob).optimal_ub;
}

ShortestPathStats shortest_path_length_stat(const Topology& topology, const SimParams& params,
                                            NodeId alice, NodeId bob) {
  check_pair(topology, alice, bob);
  const double q = params.q;
  auto factory = [&]() -> TrialFn {
    auto finder = std::make_shared<PathFinder>(topology);
    return [finder, alice, bob, q](const Trial& trial, std::span<double> out) {
      const auto hops = finder->shortest_length(trial.links, alice, bob);
      if (!hops) {
        out[1] = 1.0;
        return;
      }
      out[0] = std::pow(q, static_cast<double>(*hops) - 1.0);
      out[2] = static_cast<double>(*hops);
    };
  };
  const auto est = run_trials(topology, params, 3, factory);
  return {est[0], est[1], est[2]};
}

}  // namespace entroute
