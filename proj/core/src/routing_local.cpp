#include "entroute/routing_local.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>

#include "entroute/routing_global.hpp"

namespace entroute {

double OffsetTable::at(int dx, int dy) const noexcept {
  dx = std::abs(dx);
  dy = std::abs(dy);
  if (dx > max_dx || dy > max_dy) return beyond;
  return values[static_cast<std::size_t>(dy) * static_cast<std::size_t>(max_dx + 1) +
                static_cast<std::size_t>(dx)];
}

DistanceMetric DistanceMetric::l1() { return DistanceMetric(Kind::l1); }
DistanceMetric DistanceMetric::l2() { return DistanceMetric(Kind::l2); }

DistanceMetric DistanceMetric::table(NodeId endpoint, std::vector<double> distances) {
  DistanceMetric m(Kind::table);
  m.add_table(endpoint, std::move(distances));
  return m;
}

DistanceMetric DistanceMetric::offset(OffsetTable table) {
  const auto expected = static_cast<std::size_t>(table.max_dx + 1) * (table.max_dy + 1);
  if (table.max_dx < 0 || table.max_dy < 0 || table.values.size() != expected) {
    throw std::invalid_argument("offset table has inconsistent dimensions");
  }
  DistanceMetric m(Kind::offset);
  m.offsets_ = std::move(table);
  return m;
}

void DistanceMetric::add_table(NodeId endpoint, std::vector<double> distances) {
  if (kind_ != Kind::table) throw std::logic_error("add_table on a non-table metric");
  for (double d : distances) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("metric table entries must be finite and nonnegative");
    }
  }
  tables_[endpoint] = std::move(distances);
}

bool DistanceMetric::resolves(NodeId endpoint) const {
  return kind_ != Kind::table || tables_.contains(endpoint);
}

double DistanceMetric::distance(const Topology& topology, NodeId node, NodeId endpoint) const {
  switch (kind_) {
    case Kind::l1:
      return l1_distance(topology.coord(node), topology.coord(endpoint));
    case Kind::l2:
      return l2_distance(topology.coord(node), topology.coord(endpoint));
    case Kind::offset: {
      if (node == endpoint) return 0.0;
      const Coord a = topology.coord(node);
      const Coord b = topology.coord(endpoint);
      return offsets_->at(a.x - b.x, a.y - b.y);
    }
    case Kind::table: {
      const auto it = tables_.find(endpoint);
      if (it == tables_.end()) {
        throw std::invalid_argument("metric has no table for endpoint " + std::to_string(endpoint));
      }
      if (it->second.size() != topology.node_count()) {
        throw std::invalid_argument("metric table size does not match the topology");
      }
      return it->second[node];
    }
  }
  return 0.0;
}

std::vector<double> DistanceMetric::distances_to(const Topology& topology, NodeId endpoint) const {
  std::vector<double> out(topology.node_count());
  for (NodeId n = 0; n < out.size(); ++n) out[n] = distance(topology, n, endpoint);
  return out;
}

std::string DistanceMetric::name() const {
  switch (kind_) {
    case Kind::l1: return "L1";
    case Kind::l2: return "L2";
    case Kind::table: return "table";
    case Kind::offset: return "offset-table";
  }
  return "?";
}

std::optional<EdgeId> InternalDecision::partner(EdgeId e) const noexcept {
  for (std::uint8_t i = 0; i < count; ++i) {
    if (pairs[i].first == e) return pairs[i].second;
    if (pairs[i].second == e) return pairs[i].first;
  }
  return std::nullopt;
}

InternalDecision local_rule_decide(std::span<const Candidate> up, double tol, Stream& coins) {
  return local_rule_decide(up, tol, [&coins](std::size_t n) { return coins.below(n); });
}

std::vector<Chain> extract_chains(const LinkInstance& links,
                                  std::span<const InternalDecision> decisions,
                                  const Topology& topology) {
  if (decisions.size() != topology.node_count()) {
    throw std::invalid_argument("need one decision per node");
  }
  // Memory 2e sits at edge e's u end, 2e + 1 at its v end.
  constexpr std::size_t unpaired = ~std::size_t{0};
  const auto memory_at = [&](EdgeId e, NodeId n) -> std::size_t {
    const Edge& edge = topology.edge(e);
    if (edge.u == n) return 2 * std::size_t{e};
    if (edge.v == n) return 2 * std::size_t{e} + 1;
    throw std::invalid_argument("pairing at node " + std::to_string(n) + " names edge " +
                                std::to_string(e) + " which is not incident to it");
  };
  std::vector<std::size_t> partner(2 * topology.edge_count(), unpaired);
  for (NodeId n = 0; n < decisions.size(); ++n) {
    for (const Pairing& p : decisions[n].pairings()) {
      if (p.first == p.second) throw std::invalid_argument("pairing joins a memory with itself");
      if (!links.up(p.first) || !links.up(p.second)) {
        throw std::invalid_argument("pairing at node " + std::to_string(n) + " uses a down edge");
      }
      const std::size_t a = memory_at(p.first, n);
      const std::size_t b = memory_at(p.second, n);
      if (partner[a] != unpaired || partner[b] != unpaired) {
        throw std::invalid_argument("memory paired twice at node " + std::to_string(n));
      }
      partner[a] = b;
      partner[b] = a;
    }
  }

  const auto node_of = [&](std::size_t m) {
    const Edge& e = topology.edge(static_cast<EdgeId>(m / 2));
    return (m % 2 == 0) ? e.u : e.v;
  };
  std::vector<bool> visited(partner.size(), false);
  std::vector<Chain> chains;
  for (std::size_t start = 0; start < partner.size(); ++start) {
    if (visited[start] || partner[start] != unpaired || !links.up(static_cast<EdgeId>(start / 2))) {
      continue;
    }
    Chain chain;
    chain.end_a = node_of(start);
    chain.nodes.push_back(chain.end_a);
    std::size_t m = start;
    for (;;) {
      visited[m] = true;
      const std::size_t across = m ^ 1;  // other end of the same edge
      visited[across] = true;
      chain.nodes.push_back(node_of(across));
      if (partner[across] == unpaired) break;
      ++chain.swaps;
      m = partner[across];
    }
    chain.end_b = chain.nodes.back();
    chains.push_back(std::move(chain));
  }
  return chains;
}

FlowDistances FlowDistances::resolve(const Topology& topology, const FlowSpec& flow) {
  if (flow.alice == flow.bob) throw std::invalid_argument("flow endpoints must be distinct");
  if (flow.alice >= topology.node_count() || flow.bob >= topology.node_count()) {
    throw std::invalid_argument("flow endpoint out of range");
  }
  FlowDistances d;
  d.alice = flow.alice;
  d.bob = flow.bob;
  d.to_alice = flow.metric.distances_to(topology, flow.alice);
  d.to_bob = flow.metric.distances_to(topology, flow.bob);
  d.tolerance = flow.metric.tie_tolerance();
  return d;
}

SlotPlan SlotPlan::single_flow(const Topology& topology, const FlowSpec& flow) {
  SlotPlan plan;
  plan.topology = &topology;
  plan.flows.push_back(FlowDistances::resolve(topology, flow));
  plan.serves.assign(topology.node_count(), 0);
  plan.passive.assign(topology.node_count(), 0);
  plan.passive[flow.alice] = 1;
  plan.passive[flow.bob] = 1;
  return plan;
}

std::vector<Candidate> SlotPlan::candidates(NodeId node, const LinkInstance& links) const {
  const FlowDistances& f = flows[serves[node]];
  std::vector<Candidate> out;
  for (const Incidence& inc : topology->incident(node)) {
    if (links.up(inc.edge)) out.push_back({inc, f.to_alice[inc.neighbor], f.to_bob[inc.neighbor]});
  }
  return out;
}

std::vector<InternalDecision> decide_all(const SlotPlan& plan, const Trial& trial) {
  std::vector<InternalDecision> out(plan.topology->node_count());
  for (NodeId n = 0; n < out.size(); ++n) {
    if (plan.passive[n]) continue;
    const auto cands = plan.candidates(n, trial.links);
    Stream coins = trial.coins(n);
    out[n] = local_rule_decide(cands, plan.flows[plan.serves[n]].tolerance, coins);
  }
  return out;
}

ChainTracer::ChainTracer(const Topology& topology)
    : topology_(&topology), decided_(topology.node_count(), 0), cache_(topology.node_count()) {
  path_.reserve(64);
}

void ChainTracer::begin(const SlotPlan& plan, const Trial& trial) {
  plan_ = &plan;
  trial_ = &trial;
  ++stamp_;
}

const InternalDecision& ChainTracer::decision(NodeId node) {
  if (decided_[node] == stamp_) return cache_[node];
  decided_[node] = stamp_;
  InternalDecision& d = cache_[node];
  d = {};
  if (!plan_->passive[node]) {
    const FlowDistances& f = plan_->flows[plan_->serves[node]];
    std::array<Candidate, 8> buffer{};
    std::vector<Candidate> overflow;
    std::size_t n = 0;
    const auto incident = topology_->incident(node);
    for (const Incidence& inc : incident) {
      if (!trial_->links.up(inc.edge)) continue;
      const Candidate c{inc, f.to_alice[inc.neighbor], f.to_bob[inc.neighbor]};
      if (n < buffer.size()) {
        buffer[n++] = c;
      } else {
        if (overflow.empty()) overflow.assign(buffer.begin(), buffer.end());
        overflow.push_back(c);
      }
    }
    Stream coins = trial_->coins(node);
    const std::span<const Candidate> cands =
        overflow.empty() ? std::span<const Candidate>(buffer.data(), n)
                         : std::span<const Candidate>(overflow);
    d = local_rule_decide(cands, f.tolerance, coins);
  }
  return d;
}

RateEstimate estimate_R_loc(const Topology& topology, const SimParams& params, const FlowSpec& flow) {
  const auto plan = std::make_shared<const SlotPlan>(SlotPlan::single_flow(topology, flow));
  const double q = params.q;
  auto factory = [&topology, plan, q]() -> TrialFn {
    auto tracer = std::make_shared<ChainTracer>(topology);
    return [tracer, plan, q](const Trial& trial, std::span<double> out) {
      tracer->begin(*plan, trial);
      const NodeId bob = plan->flows[0].bob;
      double score = 0.0;
      tracer->trace_from(plan->flows[0].alice, [&](NodeId end, std::size_t swaps, auto) {
        if (end == bob) score += std::pow(q, static_cast<double>(swaps));
      });
      out[0] = score;
    };
  };
  return run_trials(topology, params, 1, factory).front();
}

DistanceMetric build_recursive_metric(const Topology& topology, const SimParams& params,
                                      const DistanceMetric& base, NodeId endpoint) {
  if (endpoint >= topology.node_count()) throw std::invalid_argument("endpoint out of range");
  std::vector<double> table(topology.node_count(), 0.0);
  for (NodeId n = 0; n < topology.node_count(); ++n) {
    if (n == endpoint) continue;
    if (!base.resolves(n) || !base.resolves(endpoint)) {
      throw std::invalid_argument("base metric cannot resolve distances to node " +
                                  std::to_string(n));
    }
    SimParams p = params;
    p.seed = derive_key(params.seed, n);
    const RateEstimate r = estimate_R_loc(topology, p, FlowSpec{n, endpoint, base});
    table[n] = 1.0 / std::max(r.mean, kRateFloor);
  }
  return DistanceMetric::table(endpoint, std::move(table));
}

DistanceMetric build_offset_metric(const SimParams& params, const DistanceMetric& base,
                                   int max_offset, int margin) {
  if (max_offset < 1 || margin < 0) throw std::invalid_argument("invalid offset-table extent");
  const int side = max_offset + 2 * margin + 1;
  const Topology probe = build_grid(side, side);
  const NodeId anchor = probe.at({margin, margin});

  OffsetTable table;
  table.max_dx = max_offset;
  table.max_dy = max_offset;
  table.beyond = 1.0 / kRateFloor;
  table.values.assign(static_cast<std::size_t>(max_offset + 1) * (max_offset + 1), 0.0);
  const auto slot = [&](int dx, int dy) -> double& {
    return table.values[static_cast<std::size_t>(dy) * (max_offset + 1) + dx];
  };
  for (int dx = 0; dx <= max_offset; ++dx) {
    for (int dy = 0; dy <= dx; ++dy) {
      if (dx == 0 && dy == 0) continue;
      SimParams p = params;
      p.seed = derive_key(params.seed, static_cast<std::uint64_t>(dx) * 4096 + dy);
      const NodeId target = probe.at({margin + dx, margin + dy});
      const RateEstimate r = estimate_R_loc(probe, p, FlowSpec{anchor, target, base});
      slot(dx, dy) = slot(dy, dx) = 1.0 / std::max(r.mean, kRateFloor);
    }
  }
  return DistanceMetric::offset(std::move(table));
}

}  // namespace entroute
