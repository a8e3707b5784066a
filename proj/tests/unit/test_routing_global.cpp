#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>

#include "entroute/routing_global.hpp"

using namespace entroute;

namespace {

SimParams params_with(double p, double q, std::uint64_t trials, std::uint64_t seed) {
  SimParams s;
  s.link = LinkModel::direct(p);
  s.q = q;
  s.trials = trials;
  s.seed = seed;
  return s;
}

// Plain BFS, independent of PathFinder.
std::optional<std::size_t> bfs_length(const Topology& g, const LinkInstance& links, NodeId a, NodeId b) {
  std::vector<int> dist(g.node_count(), -1);
  std::deque<NodeId> q{a};
  dist[a] = 0;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop_front();
    for (const Edge& e : g.edges()) {
      if (!links.up(e.id) || (e.u != u && e.v != u)) continue;
      const NodeId v = e.other(u);
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  if (dist[b] < 0) return std::nullopt;
  return static_cast<std::size_t>(dist[b]);
}

// Two disjoint routes between A=0 and B=1: one of 4 hops, one of 6, plus a
// dead-end spur at A.
Topology two_route_graph() {
  std::vector<Node> nodes;
  for (NodeId i = 0; i < 11; ++i) nodes.push_back({i, {static_cast<int>(i), 0}});
  std::vector<Edge> edges;
  const auto add = [&](NodeId u, NodeId v) {
    edges.push_back({static_cast<EdgeId>(edges.size()), u, v, 1});
  };
  add(0, 2); add(2, 3); add(3, 4); add(4, 1);                  // k = 4
  add(0, 5); add(5, 6); add(6, 7); add(7, 8); add(8, 9); add(9, 1);  // k = 6
  add(0, 10);                                                  // spur
  return Topology(nodes, edges);
}

}  // namespace

TEST_CASE("two-route instance scores q^3 + q^5") {
  const Topology g = two_route_graph();
  const LinkInstance links(std::vector<bool>(g.edge_count(), true));
  const PathSet ps = greedy_route(links, g, 0, 1);
  REQUIRE(ps.size() == 2);
  CHECK(ps.lengths() == std::vector<std::size_t>{4, 6});
  CHECK(instance_rate_global(ps, 0.9) == doctest::Approx(1.31949).epsilon(1e-12));
}

TEST_CASE("instance rate edge cases") {
  CHECK(instance_rate_global(PathSet{}, 0.7) == 0.0);
  PathSet one;
  one.paths.push_back({0});
  CHECK(instance_rate_global(one, 0.3) == 1.0);
}

TEST_CASE("adjacent interior nodes use the direct edge first") {
  const Topology g = build_grid(5, 5);
  const LinkInstance links(std::vector<bool>(g.edge_count(), true));
  const NodeId a = g.at({2, 2});
  const NodeId b = g.at({3, 2});
  const PathSet ps = greedy_route(links, g, a, b);
  REQUIRE_FALSE(ps.empty());
  CHECK(ps.paths[0].size() == 1);
  CHECK(ps.size() == 4);
}

TEST_CASE("no up edges gives an empty path set") {
  const Topology g = build_grid(4, 4);
  const LinkInstance links(std::vector<bool>(g.edge_count(), false));
  CHECK(greedy_route(links, g, 0, 15).empty());
}

TEST_CASE("path set invariants over random instances") {
  const Topology g = build_grid(9, 9);
  const LinkSampler sampler(g, LinkModel::direct(0.6));
  PathFinder finder(g);
  const NodeId a = g.at({2, 3});
  const NodeId b = g.at({6, 5});
  const std::size_t cap = max_disjoint_paths(g, a, b);
  CHECK(cap == 4);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const LinkInstance links = sampler.view(trial_key(17, i));
    const PathSet ps = finder.greedy(links, a, b);
    REQUIRE(ps.size() <= cap);
    std::set<EdgeId> used;
    std::size_t prev_len = 0;
    for (const auto& path : ps.paths) {
      NodeId at = a;
      for (EdgeId e : path) {
        REQUIRE(links.up(e));
        REQUIRE(used.insert(e).second);
        const Edge& edge = g.edge(e);
        REQUIRE((edge.u == at || edge.v == at));
        at = edge.other(at);
      }
      REQUIRE(at == b);
      REQUIRE(path.size() >= prev_len);
      prev_len = path.size();
    }
    const auto ref = bfs_length(g, links, a, b);
    REQUIRE(ref.has_value() == !ps.empty());
    if (ref) {
      REQUIRE(ps.paths[0].size() == *ref);
      REQUIRE(finder.shortest_length(links, a, b) == ref);
      const double r = instance_rate_global(ps, 0.9);
      const double first = std::pow(0.9, static_cast<double>(*ref) - 1);
      REQUIRE(r >= first - 1e-12);
      REQUIRE(r <= 4 * first + 1e-12);
    }
  }
}

TEST_CASE("greedy rate extremes") {
  const Topology g = build_grid(7, 7);
  const NodeId a = g.at({2, 2});
  const NodeId b = g.at({4, 4});
  CHECK(estimate_R_g(g, params_with(1.0, 1.0, 500, 1), a, b).mean == 4.0);
  CHECK(estimate_R_g(g, params_with(0.0, 0.9, 500, 1), a, b).mean == 0.0);
  CHECK(estimate_R_opt_UB(g, params_with(1.0, 1.0, 500, 1), a, b).mean == 4.0);
}

TEST_CASE("shortest-path statistic") {
  const Topology g = build_grid(20, 20);
  const NodeId a = g.at({5, 5});
  const NodeId b = g.at({10, 10});
  const auto full = shortest_path_length_stat(g, params_with(1.0, 0.9, 300, 1), a, b);
  CHECK(full.length.mean == 10.0);
  CHECK(full.length.std_error == 0.0);
  CHECK(full.disconnected.mean == 0.0);
  CHECK(full.weight.mean == doctest::Approx(std::pow(0.9, 9)));

  const auto none = shortest_path_length_stat(g, params_with(0.0, 0.9, 300, 1), a, b);
  CHECK(none.disconnected.mean == 1.0);
  CHECK(none.weight.mean == 0.0);

  const auto mid = shortest_path_length_stat(g, params_with(0.6, 0.9, 20000, 2), a, b);
  CHECK(mid.weight.mean > 0.0);
  CHECK(mid.weight.mean < std::pow(0.9, 9) * (1.0 - mid.disconnected.mean));
}

TEST_CASE("optimal bound equals m times the first-path term on shared instances") {
  const Topology g = build_grid(10, 10);
  const NodeId a = g.at({3, 3});
  const NodeId b = g.at({6, 6});
  const SimParams s = params_with(0.6, 0.9, 20000, 9);
  const GlobalRates r = estimate_global_rates(g, s, a, b);
  const auto sp = shortest_path_length_stat(g, s, a, b);
  CHECK(r.optimal_ub.mean == doctest::Approx(4 * sp.weight.mean).epsilon(1e-12));
  CHECK(r.greedy.mean <= r.optimal_ub.mean);
  CHECK(r.greedy.mean >= sp.weight.mean);
}

TEST_CASE("greedy rate is monotone in p and q") {
  const Topology g = build_grid(12, 12);
  const NodeId a = g.at({3, 3});
  const NodeId b = g.at({8, 8});
  const auto rg = [&](double p, double q) { return estimate_R_g(g, params_with(p, q, 20000, 5), a, b); };
  const auto within = [](const RateEstimate& lo, const RateEstimate& hi) {
    return lo.mean <= hi.mean + 3 * std::hypot(lo.std_error, hi.std_error);
  };
  CHECK(within(rg(0.5, 0.9), rg(0.6, 0.9)));
  CHECK(within(rg(0.6, 0.9), rg(0.7, 0.9)));
  CHECK(within(rg(0.6, 0.7), rg(0.6, 0.8)));
  CHECK(within(rg(0.6, 0.8), rg(0.6, 0.9)));
}
