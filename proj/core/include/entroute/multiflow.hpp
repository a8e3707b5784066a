#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "entroute/mc_engine.hpp"
#include "entroute/routing_local.hpp"
#include "entroute/topology.hpp"

namespace entroute {

/// Static split of the repeaters between two flows.
struct Boundary {
  enum class Kind { axis, wedge };

  Kind kind = Kind::axis;

  // axis: the line y = offset (horizontal) or x = offset. Flow 1 owns the
  // side with smaller coordinates when flow1_low, and always the line itself.
  bool horizontal = true;
  double offset = 0.0;
  bool flow1_low = true;

  // wedge: flow 1 owns every node within half_angle_deg of the line through
  // the pivot at axis_angle_deg (both directions), including the pivot.
  double pivot_x = 0.0;
  double pivot_y = 0.0;
  double axis_angle_deg = 0.0;
  double half_angle_deg = 45.0;

  static Boundary axis_line(bool horizontal, double offset, bool flow1_low = true);
  static Boundary wedge(double pivot_x, double pivot_y, double axis_angle_deg,
                        double half_angle_deg);

  bool serves_flow1(Coord c) const noexcept;
};

/// How repeaters divide their slots or themselves between two flows.
struct Strategy {
  enum class Kind { single_flow_timeshare, multi_flow_timeshare, spatial_division };

  Kind kind = Kind::single_flow_timeshare;
  double lambda = 1.0;  // fraction of slots given to flow 1 (time-share kinds)
  Boundary boundary;    // spatial division only

  static Strategy single_flow_timeshare(double lambda);
  static Strategy multi_flow_timeshare(double lambda);
  static Strategy spatial_division(Boundary boundary);

  /// Copy with the sweep knob applied: lambda for time-share, the offset of an
  /// axis boundary, or the half angle of a wedge.
  Strategy with_knob(double knob) const;
  double knob() const noexcept;

  void validate() const;
};

struct RateRegionPoint {
  RateEstimate r1;
  RateEstimate r2;
  double knob = 0.0;
};

/// Per-slot simulation of two flows sharing the network.
///
/// Single-flow time-share: every node except the slot owner's own endpoints
/// runs the owner's rule and only the owner's chains count. Multi-flow
/// time-share and spatial division: all four endpoints stay passive and a
/// chain joining either pair counts for that pair.
RateRegionPoint simulate_two_flows(const Topology& topology, const SimParams& params,
                                   const std::array<FlowSpec, 2>& flows, const Strategy& strategy);

std::vector<RateRegionPoint> sweep_rate_region(const Topology& topology, const SimParams& params,
                                               const std::array<FlowSpec, 2>& flows,
                                               const Strategy& family,
                                               std::span<const double> knobs);

/// Upper-right boundary of the convex hull of the achieved points and the
/// origin, i.e. everything reachable by time-sharing among them. Vertices
/// are ordered by decreasing R1.
std::vector<std::pair<double, double>> pareto_frontier(std::span<const RateRegionPoint> points);

/// Per node: probability that it lies on a chain that delivers an ebit to
/// the flow. Chains fail independently, so a node on several successful
/// candidates reports 1 - prod(1 - q^swaps).
std::vector<RateEstimate> usage_heatmap(const Topology& topology, const SimParams& params,
                                        const FlowSpec& flow);

}  // namespace entroute
