#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "entroute/multiflow.hpp"

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

bool close3(const RateEstimate& a, double b_mean, double b_err) {
  return std::abs(a.mean - b_mean) <= 3 * std::hypot(a.std_error, b_err) + 1e-12;
}

// Two parallel horizontal flows six hops apart.
struct Parallel {
  Topology g = build_grid(16, 16);
  std::array<FlowSpec, 2> flows{FlowSpec{g.at({5, 5}), g.at({11, 5}), DistanceMetric::l2()},
                                FlowSpec{g.at({5, 11}), g.at({11, 11}), DistanceMetric::l2()}};
};

}  // namespace

TEST_CASE("boundary membership") {
  const Boundary low = Boundary::axis_line(true, 3.0);
  CHECK(low.serves_flow1({0, 2}));
  CHECK(low.serves_flow1({0, 3}));
  CHECK_FALSE(low.serves_flow1({0, 4}));
  const Boundary high = Boundary::axis_line(false, 3.0, false);
  CHECK(high.serves_flow1({3, 0}));
  CHECK(high.serves_flow1({9, 0}));
  CHECK_FALSE(high.serves_flow1({2, 0}));

  const Boundary w = Boundary::wedge(5, 5, 0.0, 30.0);
  CHECK(w.serves_flow1({5, 5}));
  CHECK(w.serves_flow1({9, 6}));
  CHECK(w.serves_flow1({1, 4}));
  CHECK_FALSE(w.serves_flow1({5, 9}));
  CHECK_FALSE(w.serves_flow1({6, 8}));
  CHECK(Boundary::wedge(5, 5, 0.0, 90.0).serves_flow1({5, 9}));
  CHECK_FALSE(Boundary::wedge(5, 5, 0.0, 0.0).serves_flow1({6, 6}));
  CHECK(Boundary::wedge(0, 0, 45.0, 0.0).serves_flow1({3, 3}));
}

TEST_CASE("strategy validation and knobs") {
  CHECK_THROWS_AS(Strategy::single_flow_timeshare(1.5), std::invalid_argument);
  CHECK_THROWS_AS(Strategy::multi_flow_timeshare(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(Strategy::spatial_division(Boundary::wedge(0, 0, 0, 120)), std::invalid_argument);
  const Strategy s = Strategy::spatial_division(Boundary::axis_line(true, 2.0));
  CHECK(s.with_knob(7.0).boundary.offset == 7.0);
  CHECK(s.with_knob(7.0).knob() == 7.0);
  CHECK(Strategy::multi_flow_timeshare(0.2).with_knob(0.8).lambda == 0.8);
  const Strategy wedge = Strategy::spatial_division(Boundary::wedge(0, 0, 0, 10));
  CHECK(wedge.with_knob(40).boundary.half_angle_deg == 40.0);
}

TEST_CASE("coincident endpoints are rejected") {
  const Topology g = build_grid(5, 5);
  const std::array<FlowSpec, 2> flows{FlowSpec{0, 4, DistanceMetric::l2()}, FlowSpec{4, 24, DistanceMetric::l2()}};
  CHECK_THROWS_AS(simulate_two_flows(g, params_with(0.9, 0.9, 100, 1), flows,
                                     Strategy::single_flow_timeshare(0.5)),
                  std::invalid_argument);
}

TEST_CASE("single-flow time-share extremes") {
  const Parallel geo;
  const auto s = params_with(0.9, 0.9, 4000, 2);
  const auto one = simulate_two_flows(geo.g, s, geo.flows, Strategy::single_flow_timeshare(1.0));
  CHECK(one.r1.mean > 0.0);
  CHECK(one.r2.mean == 0.0);
  const auto zero = simulate_two_flows(geo.g, s, geo.flows, Strategy::single_flow_timeshare(0.0));
  CHECK(zero.r1.mean == 0.0);
  CHECK(zero.r2.mean > 0.0);
}

TEST_CASE("time-share points lie on the mixture of the pure slots") {
  const Parallel geo;
  for (const auto kind : {Strategy::single_flow_timeshare(1.0), Strategy::multi_flow_timeshare(1.0)}) {
    const auto s = params_with(0.9, 0.9, 20000, 5);
    const auto a = simulate_two_flows(geo.g, s, geo.flows, kind.with_knob(1.0));
    const auto b = simulate_two_flows(geo.g, s, geo.flows, kind.with_knob(0.0));
    for (double lambda : {0.25, 0.5}) {
      auto sl = s;
      sl.seed = 77;
      const auto mid = simulate_two_flows(geo.g, sl, geo.flows, kind.with_knob(lambda));
      const double r1 = lambda * a.r1.mean + (1 - lambda) * b.r1.mean;
      const double r2 = lambda * a.r2.mean + (1 - lambda) * b.r2.mean;
      const double e1 = std::hypot(lambda * a.r1.std_error, (1 - lambda) * b.r1.std_error);
      const double e2 = std::hypot(lambda * a.r2.std_error, (1 - lambda) * b.r2.std_error);
      CHECK(close3(mid.r1, r1, e1));
      CHECK(close3(mid.r2, r2, e2));
    }
  }
}

TEST_CASE("symmetric split gives symmetric rates") {
  const Parallel geo;
  const auto pt = simulate_two_flows(geo.g, params_with(0.9, 0.9, 20000, 6), geo.flows,
                                     Strategy::spatial_division(Boundary::axis_line(true, 8.0)));
  CHECK(close3(pt.r1, pt.r2.mean, pt.r2.std_error));
  CHECK(pt.r1.mean > 0.0);
}

TEST_CASE("sweep produces one point per knob") {
  const Parallel geo;
  const std::vector<double> knobs{6.0, 8.0, 10.0};
  const auto pts = sweep_rate_region(geo.g, params_with(0.9, 0.9, 500, 1), geo.flows,
                                     Strategy::spatial_division(Boundary::axis_line(true, 0.0)), knobs);
  REQUIRE(pts.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pts[i].knob == knobs[i]);
  CHECK_THROWS_AS(sweep_rate_region(geo.g, params_with(0.9, 0.9, 500, 1), geo.flows,
                                    Strategy::single_flow_timeshare(0.5), std::span<const double>{}),
                  std::invalid_argument);
}

TEST_CASE("pareto frontier of synthetic points") {
  const auto pt = [](double a, double b) {
    RateRegionPoint p;
    p.r1.mean = a;
    p.r2.mean = b;
    return p;
  };
  const std::vector<RateRegionPoint> pts{pt(1, 0), pt(0, 1), pt(0.5, 0.5), pt(0.8, 0.8), pt(0.3, 0.2)};
  const auto f = pareto_frontier(pts);
  REQUIRE(f.size() == 3);
  CHECK(f[0] == std::pair{1.0, 0.0});
  CHECK(f[1] == std::pair{0.8, 0.8});
  CHECK(f[2] == std::pair{0.0, 1.0});
  CHECK(pareto_frontier(std::span<const RateRegionPoint>{}).empty());
}

TEST_CASE("usage heat map") {
  const Topology g = build_grid(5, 5);
  const FlowSpec adj{g.at({2, 2}), g.at({3, 2}), DistanceMetric::l2()};
  const auto full = usage_heatmap(g, params_with(1.0, 1.0, 200, 1), adj);
  CHECK(full[adj.alice].mean == 1.0);
  CHECK(full[adj.bob].mean == 1.0);
  for (const auto& r : full) {
    CHECK(r.mean >= 0.0);
    CHECK(r.mean <= 1.0);
  }

  const Topology big = build_grid(20, 20);
  const FlowSpec flow{big.at({7, 10}), big.at({13, 10}), DistanceMetric::l2()};
  const auto h = usage_heatmap(big, params_with(0.9, 0.9, 5000, 3), flow);
  CHECK(h[big.at({10, 10})].mean > 10 * h[big.at({10, 17})].mean);
}
