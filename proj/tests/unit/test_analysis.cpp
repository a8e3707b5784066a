#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "entroute/analysis.hpp"
#include "entroute/routing_global.hpp"

using namespace entroute;

// Frozen constants come from tests/oracles/closed_forms.py and
// tests/oracles/tiny_grid_exact.py (mpmath / independent enumeration).

TEST_CASE("linear chain rate") {
  CHECK(linear_chain_rate(0.6, 0.9, 1) == doctest::Approx(0.6));
  CHECK(linear_chain_rate(0.6, 0.9, 4) == doctest::Approx(0.0944784).epsilon(1e-12));
  for (int n = 1; n < 40; n += 7) CHECK(linear_chain_rate(1.0, 1.0, n) == 1.0);
  CHECK_THROWS_AS(linear_chain_rate(0.6, 0.9, 0), std::invalid_argument);
}

TEST_CASE("min cut on grids and small graphs") {
  const Topology g = build_grid(9, 9);
  const LinkModel m = LinkModel::direct(0.6);
  CHECK(min_cut_upper_bound(g, m, g.at({2, 3}), g.at({6, 5})) ==
        doctest::Approx(5.287712379549449).epsilon(1e-12));
  CHECK(min_cut_upper_bound(g, m, 0, g.at({4, 4})) == doctest::Approx(2.6438561897747247).epsilon(1e-12));
  // Edge node (degree 3) against an interior one.
  CHECK(min_cut_upper_bound(g, m, g.at({0, 4}), g.at({5, 4})) ==
        doctest::Approx(-3 * std::log2(0.4)).epsilon(1e-12));

  const Topology pair = build_grid(2, 1);
  CHECK(min_cut_upper_bound(pair, LinkModel::direct(0.5), 0, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(min_cut_upper_bound(pair, LinkModel::direct(1.0), 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(min_cut_upper_bound(pair, LinkModel::direct(0.5), 0, 0), std::invalid_argument);

  // Per-channel capacity scales with the multiplicity; reduced p does not.
  const Topology doubled = build_grid(2, 1, 2);
  CHECK(min_cut_upper_bound(doubled, LinkModel::channel(0.5), 0, 1) == doctest::Approx(2.0));
  CHECK(min_cut_upper_bound(doubled, LinkModel::channel(0.5), 0, 1, true) == doctest::Approx(2.0));
  CHECK(min_cut_upper_bound(doubled, LinkModel::direct(0.5), 0, 1, true) == doctest::Approx(2.0));
  CHECK(min_cut_upper_bound(doubled, LinkModel::direct(0.5), 0, 1) == doctest::Approx(1.0));

  // Uniform p: closed form -log2((1-p)^degree) wherever degree is the bottleneck.
  for (double p : {0.1, 0.45, 0.9}) {
    const LinkModel mp = LinkModel::direct(p);
    CHECK(min_cut_upper_bound(g, mp, g.at({1, 1}), g.at({7, 7})) ==
          doctest::Approx(-4 * std::log2(1 - p)).epsilon(1e-12));
    CHECK(min_cut_upper_bound(g, mp, g.at({8, 8}), g.at({4, 4})) ==
          doctest::Approx(-2 * std::log2(1 - p)).epsilon(1e-12));
  }
}

TEST_CASE("repeaterless reference") {
  CHECK(repeaterless_capacity(0.0) == 0.0);
  CHECK(repeaterless_capacity(0.5) == doctest::Approx(1.0));
  const double eta = 1e-4;
  CHECK(repeaterless_capacity(eta) == doctest::Approx(1.4427 * eta).epsilon(1e-3));
  CHECK_THROWS_AS(repeaterless_capacity(1.0), std::invalid_argument);
}

TEST_CASE("analytic lower bound constants") {
  const auto t = lower_bound_terms(0.6, 0.9);
  CHECK(t.p_prime == doctest::Approx(0.6017915904).epsilon(1e-12));
  CHECK(t.beta == doctest::Approx(0.99758065411274796).epsilon(1e-13));
  CHECK(analytic_lower_bound(0.6, 0.9, 1) == doctest::Approx(0.60089512748898206).epsilon(1e-13));
  CHECK(analytic_lower_bound(0.6, 0.9, 4) == doctest::Approx(0.095043464360395791).epsilon(1e-13));
  CHECK(analytic_lower_bound(0.6, 0.9, 10) == doctest::Approx(0.0023777676240515163).epsilon(1e-13));

  CHECK_THROWS_AS(lower_bound_terms(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(lower_bound_terms(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(lower_bound_terms(0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(lower_bound_terms(0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(analytic_lower_bound(0.5, 0.5, 0), std::invalid_argument);
}

TEST_CASE("beta below one and the bound beats the linear chain") {
  for (int i = 1; i <= 20; ++i) {
    for (int j = 1; j <= 20; ++j) {
      const double p = i / 21.0;
      const double q = j / 21.0;
      const auto t = lower_bound_terms(p, q);
      REQUIRE(t.beta < 1.0);
      REQUIRE(t.per_hop > p * q);
      REQUIRE(t.per_hop < 1.0);
      for (int n = 1; n <= 30; n += 3) REQUIRE(analytic_lower_bound(p, q, n) >= 0.0);
    }
  }
  for (int n = 2; n <= 30; ++n) {
    CHECK(analytic_lower_bound(0.6, 0.9, n) > linear_chain_rate(0.6, 0.9, n));
  }
}

TEST_CASE("scaling fit recovers exact exponentials") {
  std::vector<ScalingPoint> pts;
  for (int n = 2; n <= 12; ++n) pts.push_back({double(n), {0.5 * std::pow(0.8, n), 0.0, 1000}});
  const ScalingFit fit = fit_scaling(pts);
  CHECK(fit.f == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(fit.g == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fit.points_used == pts.size());
  CHECK(fit.n_min == 2.0);
  CHECK(fit.n_max == 12.0);

  std::vector<ScalingPoint> lin;
  for (int n = 1; n <= 10; ++n) {
    const double r = linear_chain_rate(0.6, 0.9, n);
    lin.push_back({double(n), {r, r * 0.01, 1000}});
  }
  const ScalingFit lf = fit_scaling(lin);
  CHECK(lf.f == doctest::Approx(0.54).epsilon(1e-10));
  CHECK(lf.g == doctest::Approx(1 / 0.9).epsilon(1e-10));
  CHECK(lf.residual < 1e-12);
  CHECK(lf.f_std_error > 0.0);
}

TEST_CASE("scaling fit trims pre-asymptotic points") {
  std::vector<ScalingPoint> pts;
  for (int n = 1; n <= 12; ++n) {
    double r = 0.3 * std::pow(0.7, n);
    if (n <= 2) r *= 3.0;  // strong curvature at short range
    pts.push_back({double(n), {r, r * 0.01, 1000}});
  }
  const ScalingFit fit = fit_scaling(pts);
  CHECK(fit.dropped == 2);
  CHECK(fit.n_min == 3.0);
  CHECK(fit.f == doctest::Approx(0.7).epsilon(1e-10));

  FitOptions no_trim;
  no_trim.trim = false;
  CHECK(fit_scaling(pts, no_trim).dropped == 0);
}

TEST_CASE("scaling fit rejects bad input") {
  std::vector<ScalingPoint> three{{1, {0.5, 0.01, 10}}, {2, {0.25, 0.01, 10}}, {3, {0.1, 0.01, 10}}};
  CHECK_THROWS_AS(fit_scaling(three), std::invalid_argument);
  std::vector<ScalingPoint> zero{{1, {0.5, 0.01, 10}}, {2, {0.0, 0.0, 10}}, {3, {0.1, 0.01, 10}}, {4, {0.1, 0.01, 10}}};
  CHECK_THROWS_AS(fit_scaling(zero), std::invalid_argument);
}

TEST_CASE("oracle trivial cases") {
  const Topology one = build_grid(2, 1);
  const Topology three = build_grid(3, 1);
  for (double p : {0.2, 0.7}) {
    const LinkModel m = LinkModel::direct(p);
    CHECK(exact_rate_oracle(one, m, 0.5, OracleRule::global(), 0, 1) == doctest::Approx(p));
    CHECK(exact_rate_oracle(one, m, 0.5, OracleRule::local(DistanceMetric::l2()), 0, 1) == doctest::Approx(p));
    CHECK(exact_rate_oracle(three, m, 0.8, OracleRule::global(), 0, 2) == doctest::Approx(p * p * 0.8));
    CHECK(exact_rate_oracle(three, m, 0.8, OracleRule::local(DistanceMetric::l1()), 0, 2) ==
          doctest::Approx(p * p * 0.8));
  }
  CHECK_THROWS_AS(exact_rate_oracle(build_grid(4, 3), LinkModel::direct(0.5), 0.9, OracleRule::global(), 0, 11),
                  std::invalid_argument);
}

TEST_CASE("oracle matches independent enumeration on tiny grids") {
  struct Case {
    int w, h;
    double p, q, global, local;
  };
  const std::vector<Case> cases{
      {3, 2, 0.3, 0.7, 0.03770165007000001, 0.03233556206999999},
      {3, 2, 0.6, 0.9, 0.42974654976000015, 0.33883733376},
      {3, 2, 0.9, 0.9, 1.20617089389, 0.83203642989},
      {3, 3, 0.3, 0.7, 0.015241963387623165, 0.011175411845467595},
      {3, 3, 0.6, 0.9, 0.37797165991243026, 0.25817243679472957},
      {3, 3, 0.9, 0.9, 1.1529748954475627, 0.9790810079317256},
  };
  for (const Case& c : cases) {
    const Topology g = build_grid(c.w, c.h);
    const NodeId a = g.at({0, 0});
    const NodeId b = g.at({c.w - 1, c.h - 1});
    const LinkModel m = LinkModel::direct(c.p);
    CHECK(exact_rate_oracle(g, m, c.q, OracleRule::global(), a, b) == doctest::Approx(c.global).epsilon(1e-12));
    CHECK(exact_rate_oracle(g, m, c.q, OracleRule::local(DistanceMetric::l2()), a, b) ==
          doctest::Approx(c.local).epsilon(1e-12));
  }
}

TEST_CASE("Monte Carlo agrees with the oracle on a tiny grid") {
  const Topology g = build_grid(3, 2);
  SimParams s;
  s.link = LinkModel::direct(0.6);
  s.q = 0.9;
  s.trials = 200000;
  s.seed = 31;
  const double exact_g = exact_rate_oracle(g, s.link, s.q, OracleRule::global(), 0, 5);
  const double exact_l = exact_rate_oracle(g, s.link, s.q, OracleRule::local(DistanceMetric::l2()), 0, 5);
  const auto mc_g = estimate_R_g(g, s, 0, 5);
  const auto mc_l = estimate_R_loc(g, s, {0, 5, DistanceMetric::l2()});
  CHECK(std::abs(mc_g.mean - exact_g) <= 4 * mc_g.std_error);
  CHECK(std::abs(mc_l.mean - exact_l) <= 4 * mc_l.std_error);
}
