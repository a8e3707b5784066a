#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "entroute/mc_engine.hpp"
#include "entroute/topology.hpp"

namespace entroute {

/// Translation-invariant distances indexed by |dx|, |dy| between a node and
/// an endpoint (grids only).
struct OffsetTable {
  int max_dx = 0;
  int max_dy = 0;
  std::vector<double> values;  // (max_dx + 1) * (max_dy + 1), row-major in dy
  double beyond = 1e6;         // distance for offsets outside the table

  double at(int dx, int dy) const noexcept;
};

/// Distance d(node, endpoint) steering the local rule toward Alice or Bob.
class DistanceMetric {
 public:
  enum class Kind { l1, l2, table, offset };

  static DistanceMetric l1();
  static DistanceMetric l2();
  /// Explicit per-node distances to `endpoint`, indexed by node id.
  static DistanceMetric table(NodeId endpoint, std::vector<double> distances);
  static DistanceMetric offset(OffsetTable table);

  /// Adds or replaces the table for another endpoint (table kind only).
  void add_table(NodeId endpoint, std::vector<double> distances);

  Kind kind() const noexcept { return kind_; }
  /// Values closer than this count as a tie; L1 distances are integers and compare exactly.
  double tie_tolerance() const noexcept { return kind_ == Kind::l1 ? 0.0 : 1e-9; }
  bool resolves(NodeId endpoint) const;

  double distance(const Topology& topology, NodeId node, NodeId endpoint) const;
  std::vector<double> distances_to(const Topology& topology, NodeId endpoint) const;

  const std::map<NodeId, std::vector<double>>& tables() const noexcept { return tables_; }
  const std::optional<OffsetTable>& offsets() const noexcept { return offsets_; }

  std::string name() const;

 private:
  explicit DistanceMetric(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::map<NodeId, std::vector<double>> tables_;
  std::optional<OffsetTable> offsets_;
};

/// One Alice-Bob pair routed by the local rule.
struct FlowSpec {
  NodeId alice = 0;
  NodeId bob = 0;
  DistanceMetric metric = DistanceMetric::l2();
};

/// Internal link between the memories attached to two incident edges.
struct Pairing {
  EdgeId first = 0;
  EdgeId second = 0;
};

/// Memory pairings (BSMs) chosen at one repeater for one slot.
struct InternalDecision {
  std::array<Pairing, 2> pairs{};
  std::uint8_t count = 0;

  std::span<const Pairing> pairings() const noexcept { return {pairs.data(), count}; }
  void add(EdgeId a, EdgeId b) noexcept { pairs[count++] = {a, b}; }
  /// Edge paired with `e` at this node, if any.
  std::optional<EdgeId> partner(EdgeId e) const noexcept;
};

/// An up neighbor seen by a repeater, with the neighbor's distances.
struct Candidate {
  Incidence link;
  double to_alice = 0.0;
  double to_bob = 0.0;
};

namespace detail {

template <class Chooser>
std::size_t argmin_with_ties(std::span<const Candidate> cands, bool toward_alice, double tol,
                             std::size_t excluded, Chooser& choose) {
  const auto value = [&](std::size_t i) { return toward_alice ? cands[i].to_alice : cands[i].to_bob; };
  double best = 0.0;
  bool have = false;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (i == excluded) continue;
    if (!have || value(i) < best) best = value(i);
    have = true;
  }
  std::size_t ties = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (i != excluded && value(i) <= best + tol) ++ties;
  }
  std::size_t pick = ties == 1 ? 0 : choose(ties);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (i != excluded && value(i) <= best + tol && pick-- == 0) return i;
  }
  return excluded;  // unreachable: at least one candidate survives
}

}  // namespace detail

/// The local link-state rule at one repeater.
///
/// v is the up neighbor nearest Alice and w the one nearest Bob. When they
/// coincide, either v or w is swapped for its runner-up, whichever gives the
/// smaller d_A(v) + d_B(w). With all four links up the two leftover memories
/// are paired as well. Fewer than two up links means no pairing. Ties inside
/// `tol` are settled by `choose(n)`, which returns a uniform index in [0, n).
template <class Chooser>
InternalDecision local_rule_decide(std::span<const Candidate> up, double tol, Chooser&& choose) {
  InternalDecision d;
  if (up.size() < 2) return d;
  if (up.size() == 2) {
    d.add(up[0].link.edge, up[1].link.edge);
    return d;
  }
  constexpr std::size_t none = ~std::size_t{0};
  std::size_t v = detail::argmin_with_ties(up, true, tol, none, choose);
  std::size_t w = detail::argmin_with_ties(up, false, tol, none, choose);
  if (v == w) {
    const std::size_t v_alt = detail::argmin_with_ties(up, true, tol, w, choose);
    const std::size_t w_alt = detail::argmin_with_ties(up, false, tol, v, choose);
    const double replace_v = up[v_alt].to_alice + up[w].to_bob;
    const double replace_w = up[v].to_alice + up[w_alt].to_bob;
    bool take_v_alt = replace_v < replace_w;
    if (std::abs(replace_v - replace_w) <= tol) take_v_alt = choose(2) == 0;
    if (take_v_alt) {
      v = v_alt;
    } else {
      w = w_alt;
    }
  }
  d.add(up[v].link.edge, up[w].link.edge);
  if (up.size() == 4) {
    std::array<EdgeId, 2> rest{};
    std::size_t k = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i != v && i != w) rest[k++] = up[i].link.edge;
    }
    d.add(rest[0], rest[1]);
  }
  return d;
}

InternalDecision local_rule_decide(std::span<const Candidate> up, double tol, Stream& coins);

/// Maximal alternating sequence of up external links and pairings.
struct Chain {
  NodeId end_a = 0;
  NodeId end_b = 0;
  std::size_t swaps = 0;
  std::vector<NodeId> nodes;  // visiting order, terminals included

  bool joins(NodeId x, NodeId y) const noexcept {
    return (end_a == x && end_b == y) || (end_a == y && end_b == x);
  }
};

/// All open chains of an instance under the given per-node decisions;
/// closed loops are dropped. Throws std::invalid_argument if a decision
/// pairs a memory twice, pairs a down edge, or names a non-incident edge.
std::vector<Chain> extract_chains(const LinkInstance& links,
                                  std::span<const InternalDecision> decisions,
                                  const Topology& topology);

/// Precomputed distances for one flow.
struct FlowDistances {
  NodeId alice = 0;
  NodeId bob = 0;
  std::vector<double> to_alice;
  std::vector<double> to_bob;
  double tolerance = 0.0;

  static FlowDistances resolve(const Topology& topology, const FlowSpec& flow);
};

/// Which flow each repeater serves in a slot, and which nodes never swap.
struct SlotPlan {
  const Topology* topology = nullptr;
  std::vector<FlowDistances> flows;
  std::vector<std::uint8_t> serves;   // flow index per node
  std::vector<std::uint8_t> passive;  // 1 for nodes that make no pairings

  static SlotPlan single_flow(const Topology& topology, const FlowSpec& flow);
  std::vector<Candidate> candidates(NodeId node, const LinkInstance& links) const;
};

/// Decisions for every node of an instance, drawing coins per node from the trial.
std::vector<InternalDecision> decide_all(const SlotPlan& plan, const Trial& trial);

/// Follows chains outward from a passive node, deciding repeaters lazily.
/// Holds per-worker scratch; one instance must not be shared across threads.
class ChainTracer {
 public:
  explicit ChainTracer(const Topology& topology);

  void begin(const SlotPlan& plan, const Trial& trial);

  /// Calls on_chain(terminal, swaps, nodes) for every chain leaving `start`
  /// through an up edge; `start` must be passive in the current plan.
  template <class OnChain>
  void trace_from(NodeId start, OnChain&& on_chain);

  const InternalDecision& decision(NodeId node);

 private:
  const Topology* topology_;
  const SlotPlan* plan_ = nullptr;
  const Trial* trial_ = nullptr;
  std::vector<std::uint64_t> decided_;
  std::vector<InternalDecision> cache_;
  std::vector<NodeId> path_;
  std::uint64_t stamp_ = 0;
};

template <class OnChain>
void ChainTracer::trace_from(NodeId start, OnChain&& on_chain) {
  const std::size_t guard = 2 * topology_->edge_count() + 2;
  for (const Incidence& first : topology_->incident(start)) {
    if (!trial_->links.up(first.edge)) continue;
    path_.clear();
    path_.push_back(start);
    EdgeId via = first.edge;
    NodeId at = first.neighbor;
    std::size_t swaps = 0;
    for (;;) {
      path_.push_back(at);
      if (plan_->passive[at]) break;
      const auto next = decision(at).partner(via);
      if (!next) break;
      ++swaps;
      via = *next;
      at = topology_->edge(via).other(at);
      if (swaps > guard) throw std::logic_error("chain walk did not terminate");
    }
    on_chain(at, swaps, std::span<const NodeId>(path_));
  }
}

/// Expected ebits per slot for one flow under the local rule.
RateEstimate estimate_R_loc(const Topology& topology, const SimParams& params, const FlowSpec& flow);

/// Rates below this map to distance 1 / kRateFloor in recursive metrics.
inline constexpr double kRateFloor = 1e-6;

/// Table metric for `endpoint`: d(n) = 1 / max(R_loc(n, endpoint), floor)
/// with the rate measured under `base`; d(endpoint) = 0.
DistanceMetric build_recursive_metric(const Topology& topology, const SimParams& params,
                                      const DistanceMetric& base, NodeId endpoint);

/// Grid version that exploits translation invariance: one rate per offset
/// (dx, dy) with 0 <= dy <= dx <= max_offset, measured on a probe grid with
/// `margin` spare hops around the pair and mirrored across the diagonal.
DistanceMetric build_offset_metric(const SimParams& params, const DistanceMetric& base,
                                   int max_offset, int margin);

/// {"endpoint": id, "entries": [{"node": id, "d": value}]}
std::string metric_table_to_json(const Topology& topology, const DistanceMetric& metric,
                                 NodeId endpoint);
/// Accepts one table document or an array of them; returns a table metric.
DistanceMetric metric_tables_from_json(std::string_view text, std::size_t node_count);

}  // namespace entroute
