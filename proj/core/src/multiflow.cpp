#include "entroute/multiflow.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace entroute {

namespace {

constexpr double kBoundaryEps = 1e-9;

struct TwoFlowSetup {
  std::vector<SlotPlan> plans;
  // score_flow[plan][f]: whether flow f's chains count in slots run by plan.
  std::vector<std::array<bool, 2>> score_flow;
};

TwoFlowSetup make_setup(const Topology& topology, const std::array<FlowSpec, 2>& flows,
                        const Strategy& strategy) {
  const std::array<NodeId, 4> ends{flows[0].alice, flows[0].bob, flows[1].alice, flows[1].bob};
  for (std::size_t i = 0; i < ends.size(); ++i) {
    for (std::size_t j = i + 1; j < ends.size(); ++j) {
      if (ends[i] == ends[j]) throw std::invalid_argument("the four flow endpoints must be distinct");
    }
  }

  std::vector<FlowDistances> dist{FlowDistances::resolve(topology, flows[0]),
                                  FlowDistances::resolve(topology, flows[1])};
  const auto base_plan = [&]() {
    SlotPlan plan;
    plan.topology = &topology;
    plan.flows = dist;
    plan.serves.assign(topology.node_count(), 0);
    plan.passive.assign(topology.node_count(), 0);
    return plan;
  };

  TwoFlowSetup setup;
  switch (strategy.kind) {
    case Strategy::Kind::single_flow_timeshare:
    case Strategy::Kind::multi_flow_timeshare:
      for (std::uint8_t owner = 0; owner < 2; ++owner) {
        SlotPlan plan = base_plan();
        std::fill(plan.serves.begin(), plan.serves.end(), owner);
        if (strategy.kind == Strategy::Kind::single_flow_timeshare) {
          plan.passive[flows[owner].alice] = plan.passive[flows[owner].bob] = 1;
          setup.score_flow.push_back({owner == 0, owner == 1});
        } else {
          for (NodeId e : ends) plan.passive[e] = 1;
          setup.score_flow.push_back({true, true});
        }
        setup.plans.push_back(std::move(plan));
      }
      break;
    case Strategy::Kind::spatial_division: {
      SlotPlan plan = base_plan();
      for (NodeId n = 0; n < topology.node_count(); ++n) {
        plan.serves[n] = strategy.boundary.serves_flow1(topology.coord(n)) ? 0 : 1;
      }
      plan.serves[flows[0].alice] = plan.serves[flows[0].bob] = 0;
      plan.serves[flows[1].alice] = plan.serves[flows[1].bob] = 1;
      for (NodeId e : ends) plan.passive[e] = 1;
      setup.plans.push_back(std::move(plan));
      setup.score_flow.push_back({true, true});
      break;
    }
  }
  return setup;
}

}  // namespace

Boundary Boundary::axis_line(bool horizontal, double offset, bool flow1_low) {
  Boundary b;
  b.kind = Kind::axis;
  b.horizontal = horizontal;
  b.offset = offset;
  b.flow1_low = flow1_low;
  return b;
}

Boundary Boundary::wedge(double pivot_x, double pivot_y, double axis_angle_deg,
                         double half_angle_deg) {
  Boundary b;
  b.kind = Kind::wedge;
  b.pivot_x = pivot_x;
  b.pivot_y = pivot_y;
  b.axis_angle_deg = axis_angle_deg;
  b.half_angle_deg = half_angle_deg;
  return b;
}

bool Boundary::serves_flow1(Coord c) const noexcept {
  if (kind == Kind::axis) {
    const double s = (horizontal ? c.y : c.x) - offset;
    return flow1_low ? s <= kBoundaryEps : s >= -kBoundaryEps;
  }
  const double dx = c.x - pivot_x;
  const double dy = c.y - pivot_y;
  if (std::abs(dx) < kBoundaryEps && std::abs(dy) < kBoundaryEps) return true;
  const double axis = axis_angle_deg * std::numbers::pi / 180.0;
  const double along = std::abs(dx * std::cos(axis) + dy * std::sin(axis));
  const double across = std::abs(-dx * std::sin(axis) + dy * std::cos(axis));
  const double angle = std::atan2(across, along) * 180.0 / std::numbers::pi;  // in [0, 90]
  return angle <= half_angle_deg + kBoundaryEps;
}

Strategy Strategy::single_flow_timeshare(double lambda) {
  Strategy s;
  s.kind = Kind::single_flow_timeshare;
  s.lambda = lambda;
  s.validate();
  return s;
}

Strategy Strategy::multi_flow_timeshare(double lambda) {
  Strategy s;
  s.kind = Kind::multi_flow_timeshare;
  s.lambda = lambda;
  s.validate();
  return s;
}

Strategy Strategy::spatial_division(Boundary boundary) {
  Strategy s;
  s.kind = Kind::spatial_division;
  s.boundary = boundary;
  s.validate();
  return s;
}

Strategy Strategy::with_knob(double knob) const {
  Strategy s = *this;
  if (kind != Kind::spatial_division) {
    s.lambda = knob;
  } else if (boundary.kind == Boundary::Kind::axis) {
    s.boundary.offset = knob;
  } else {
    s.boundary.half_angle_deg = knob;
  }
  s.validate();
  return s;
}

double Strategy::knob() const noexcept {
  if (kind != Kind::spatial_division) return lambda;
  return boundary.kind == Boundary::Kind::axis ? boundary.offset : boundary.half_angle_deg;
}

void Strategy::validate() const {
  if (kind != Kind::spatial_division && !(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("time-share fraction must lie in [0, 1]");
  }
  if (kind == Kind::spatial_division && boundary.kind == Boundary::Kind::wedge &&
      !(boundary.half_angle_deg >= 0.0 && boundary.half_angle_deg <= 90.0)) {
    throw std::invalid_argument("wedge half angle must lie in [0, 90] degrees");
  }
}

RateRegionPoint simulate_two_flows(const Topology& topology, const SimParams& params,
                                   const std::array<FlowSpec, 2>& flows, const Strategy& strategy) {
  strategy.validate();
  const auto setup = std::make_shared<const TwoFlowSetup>(make_setup(topology, flows, strategy));
  const bool timeshare = strategy.kind != Strategy::Kind::spatial_division;
  const double lambda = strategy.lambda;
  const double q = params.q;

  auto factory = [&topology, setup, timeshare, lambda, q]() -> TrialFn {
    auto tracer = std::make_shared<ChainTracer>(topology);
    return [tracer, setup, timeshare, lambda, q](const Trial& trial, std::span<double> out) {
      std::size_t which = 0;
      if (timeshare) which = trial.aux().uniform() < lambda ? 0 : 1;
      const SlotPlan& plan = setup->plans[which];
      tracer->begin(plan, trial);
      for (std::size_t f = 0; f < 2; ++f) {
        if (!setup->score_flow[which][f]) continue;
        const NodeId bob = plan.flows[f].bob;
        tracer->trace_from(plan.flows[f].alice, [&](NodeId end, std::size_t swaps, auto) {
          if (end == bob) out[f] += std::pow(q, static_cast<double>(swaps));
        });
      }
    };
  };
  const auto est = run_trials(topology, params, 2, factory);
  return {est[0], est[1], strategy.knob()};
}

std::vector<RateRegionPoint> sweep_rate_region(const Topology& topology, const SimParams& params,
                                               const std::array<FlowSpec, 2>& flows,
                                               const Strategy& family,
                                               std::span<const double> knobs) {
  if (knobs.empty()) throw std::invalid_argument("knob grid must not be empty");
  std::vector<RateRegionPoint> out;
  out.reserve(knobs.size());
  for (std::size_t i = 0; i < knobs.size(); ++i) {
    SimParams p = params;
    p.seed = derive_key(params.seed, i);
    out.push_back(simulate_two_flows(topology, p, flows, family.with_knob(knobs[i])));
  }
  return out;
}

std::vector<std::pair<double, double>> pareto_frontier(std::span<const RateRegionPoint> points) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) pts.emplace_back(std::max(0.0, p.r1.mean), std::max(0.0, p.r2.mean));
  if (pts.empty()) return {};
  const double r1_max = std::max_element(pts.begin(), pts.end())->first;
  double r2_max = 0.0;
  for (const auto& p : pts) r2_max = std::max(r2_max, p.second);
  pts.emplace_back(r1_max, 0.0);
  pts.emplace_back(0.0, r2_max);
  // Monotone-chain upper hull, walking from (0, r2_max) toward (r1_max, 0).
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.first - a.first) * (p.second - a.second) -
                           (b.second - a.second) * (p.first - a.first);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  // Keep the part that is not dominated: from the highest R2 onward.
  const auto top = std::max_element(hull.begin(), hull.end(), [](const auto& a, const auto& b) {
    return a.second < b.second || (a.second == b.second && a.first < b.first);
  });
  std::vector<std::pair<double, double>> frontier(top, hull.end());
  std::reverse(frontier.begin(), frontier.end());
  return frontier;
}

std::vector<RateEstimate> usage_heatmap(const Topology& topology, const SimParams& params,
                                        const FlowSpec& flow) {
  const auto plan = std::make_shared<const SlotPlan>(SlotPlan::single_flow(topology, flow));
  const double q = params.q;
  auto factory = [&topology, plan, q]() -> TrialFn {
    auto tracer = std::make_shared<ChainTracer>(topology);
    auto seen = std::make_shared<std::vector<std::uint64_t>>(topology.node_count(), 0);
    auto chain_id = std::make_shared<std::uint64_t>(0);
    return [tracer, plan, q, seen, chain_id](const Trial& trial, std::span<double> out) {
      tracer->begin(*plan, trial);
      const NodeId bob = plan->flows[0].bob;
      tracer->trace_from(plan->flows[0].alice,
                         [&](NodeId end, std::size_t swaps, std::span<const NodeId> nodes) {
                           if (end != bob) return;
                           const double w = std::pow(q, static_cast<double>(swaps));
                           const std::uint64_t id = ++*chain_id;
                           for (NodeId n : nodes) {
                             if ((*seen)[n] == id) continue;
                             (*seen)[n] = id;
                             out[n] += w - out[n] * w;
                           }
                         });
    };
  };
  return run_trials(topology, params, topology.node_count(), factory);
}

}  // namespace entroute
