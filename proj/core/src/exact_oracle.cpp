#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "entroute/analysis.hpp"
#include "entroute/routing_global.hpp"

namespace entroute {

namespace {

constexpr std::size_t kMaxBranchProduct = std::size_t{1} << 20;

using Outcome = std::pair<InternalDecision, double>;

std::vector<std::pair<EdgeId, EdgeId>> canonical(const InternalDecision& d) {
  std::vector<std::pair<EdgeId, EdgeId>> out;
  for (const Pairing& p : d.pairings()) out.emplace_back(std::min(p.first, p.second), std::max(p.first, p.second));
  std::sort(out.begin(), out.end());
  return out;
}

// Every decision the rule can take on these candidates, with its probability.
// Replays the rule under each script of tie-break answers, odometer style.
std::vector<Outcome> decision_distribution(std::span<const Candidate> cands, double tol) {
  std::vector<Outcome> out;
  std::vector<std::size_t> script;
  std::vector<std::size_t> arity;
  for (;;) {
    arity.clear();
    std::size_t pos = 0;
    double weight = 1.0;
    auto choose = [&](std::size_t n) {
      if (pos == script.size()) script.push_back(0);
      arity.push_back(n);
      weight /= static_cast<double>(n);
      return script[pos++];
    };
    const InternalDecision d = local_rule_decide(cands, tol, choose);
    script.resize(pos);

    const auto key = canonical(d);
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Outcome& o) { return canonical(o.first) == key; });
    if (it == out.end()) {
      out.emplace_back(d, weight);
    } else {
      it->second += weight;
    }

    std::size_t i = script.size();
    while (i > 0 && script[i - 1] + 1 >= arity[i - 1]) --i;
    if (i == 0) break;
    ++script[i - 1];
    script.resize(i);
  }
  return out;
}

double local_instance_rate(const Topology& topology, const SlotPlan& plan, const LinkInstance& links,
                           double q, NodeId alice, NodeId bob) {
  std::vector<std::vector<Outcome>> per_node(topology.node_count());
  std::size_t product = 1;
  for (NodeId n = 0; n < topology.node_count(); ++n) {
    if (plan.passive[n]) {
      per_node[n].emplace_back(InternalDecision{}, 1.0);
    } else {
      const auto cands = plan.candidates(n, links);
      per_node[n] = decision_distribution(cands, plan.flows[0].tolerance);
    }
    product *= per_node[n].size();
    if (product > kMaxBranchProduct) {
      throw std::invalid_argument("exact oracle: tie-break branches exceed " +
                                  std::to_string(kMaxBranchProduct) + " joint outcomes");
    }
  }

  std::vector<std::size_t> digit(topology.node_count(), 0);
  std::vector<InternalDecision> decisions(topology.node_count());
  double total = 0.0;
  for (;;) {
    double weight = 1.0;
    for (NodeId n = 0; n < topology.node_count(); ++n) {
      decisions[n] = per_node[n][digit[n]].first;
      weight *= per_node[n][digit[n]].second;
    }
    double score = 0.0;
    for (const Chain& c : extract_chains(links, decisions, topology)) {
      if (c.joins(alice, bob)) score += std::pow(q, static_cast<double>(c.swaps));
    }
    total += weight * score;

    std::size_t n = 0;
    while (n < digit.size() && ++digit[n] == per_node[n].size()) digit[n++] = 0;
    if (n == digit.size()) break;
  }
  return total;
}

}  // namespace

double exact_rate_oracle(const Topology& topology, const LinkModel& model, double q,
                         const OracleRule& rule, NodeId alice, NodeId bob) {
  const std::size_t m = topology.edge_count();
  if (m > kOracleMaxEdges) {
    throw std::invalid_argument("exact oracle enumerates 2^|E| outcomes; |E| = " + std::to_string(m) +
                                " exceeds " + std::to_string(kOracleMaxEdges));
  }
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (alice == bob || alice >= topology.node_count() || bob >= topology.node_count()) {
    throw std::invalid_argument("exact oracle needs two distinct endpoints in range");
  }
  const auto probs = model.edge_probs(topology);

  std::optional<SlotPlan> plan;
  if (rule.kind == OracleRule::Kind::local) {
    plan = SlotPlan::single_flow(topology, FlowSpec{alice, bob, rule.metric});
  }

  double total = 0.0;
  std::vector<bool> states(m);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double weight = 1.0;
    for (std::size_t e = 0; e < m; ++e) {
      states[e] = (mask >> e) & 1;
      weight *= states[e] ? probs[e] : 1.0 - probs[e];
    }
    if (weight == 0.0) continue;
    const LinkInstance links(states);
    const double score = plan ? local_instance_rate(topology, *plan, links, q, alice, bob)
                              : instance_rate_global(greedy_route(links, topology, alice, bob), q);
    total += weight * score;
  }
  return total;
}

}  // namespace entroute
