#include "entroute/analysis.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/edmonds_karp_max_flow.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace entroute {

double linear_chain_rate(double p, double q, int n) {
  if (n < 1) throw std::invalid_argument("linear chain needs at least one hop");
  return std::pow(p, n) * std::pow(q, n - 1);
}

double repeaterless_capacity(double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("transmissivity must lie in [0, 1)");
  return -std::log2(1.0 - eta);
}

namespace {

using FlowTraits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
using FlowGraph = boost::adjacency_list<
    boost::vecS, boost::vecS, boost::directedS, boost::no_property,
    boost::property<boost::edge_capacity_t, double,
                    boost::property<boost::edge_residual_capacity_t, double,
                                    boost::property<boost::edge_reverse_t,
                                                    FlowTraits::edge_descriptor>>>>;

}  // namespace

double min_cut_upper_bound(const Topology& topology, const LinkModel& model, NodeId alice,
                           NodeId bob, bool per_channel) {
  if (alice == bob) throw std::invalid_argument("min cut needs two distinct nodes");
  if (alice >= topology.node_count() || bob >= topology.node_count()) {
    throw std::invalid_argument("min cut endpoint out of range");
  }

  FlowGraph g(topology.node_count());
  auto capacity = boost::get(boost::edge_capacity, g);
  auto reverse = boost::get(boost::edge_reverse, g);
  const auto add_arc = [&](NodeId from, NodeId to, double cap) {
    const auto fwd = boost::add_edge(from, to, g).first;
    const auto back = boost::add_edge(to, from, g).first;
    capacity[fwd] = cap;
    capacity[back] = 0.0;
    reverse[fwd] = back;
    reverse[back] = fwd;
  };

  for (const Edge& e : topology.edges()) {
    const double p = per_channel ? model.channel_prob(topology, e.id) : model.edge_prob(topology, e.id);
    if (p >= 1.0) {
      throw std::invalid_argument("edge " + std::to_string(e.id) +
                                  " succeeds with probability 1, so its cut capacity is infinite");
    }
    double cap = -std::log2(1.0 - p);
    if (per_channel) cap *= e.multiplicity;
    add_arc(e.u, e.v, cap);
    add_arc(e.v, e.u, cap);
  }
  return boost::edmonds_karp_max_flow(g, alice, bob);
}

LowerBoundTerms lower_bound_terms(double p, double q) {
  if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0)) {
    throw std::domain_error(
        "lower bound needs 0 < p < 1 and 0 < q < 1: beta = log(sqrt(p'p) q) / log(pq) is singular "
        "on the boundary");
  }
  const long double lp = p;
  const long double lq = q;
  const long double p_prime = lp + lp * lp * lp * std::pow(1.0L - lp, 5) * lq * lq;
  const long double per_hop = std::sqrt(p_prime * lp) * lq;
  const long double beta = std::log(per_hop) / std::log(lp * lq);
  return {static_cast<double>(p_prime), static_cast<double>(beta), static_cast<double>(per_hop)};
}

double analytic_lower_bound(double p, double q, int n) {
  if (n < 1) throw std::invalid_argument("lower bound needs n >= 1");
  const LowerBoundTerms t = lower_bound_terms(p, q);
  const long double pq = static_cast<long double>(p) * q;
  return static_cast<double>(std::pow(pq, static_cast<long double>(t.beta) * n) / q);
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_var = 0.0;
  double residual = 0.0;
};

LineFit weighted_line(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w, bool absolute_weights) {
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double delta = s * sxx - sx * sx;
  if (!(delta > 0.0)) throw std::invalid_argument("scaling fit needs distinct distances");
  LineFit fit;
  fit.slope = (s * sxy - sx * sy) / delta;
  fit.intercept = (sxx * sy - sx * sxy) / delta;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    chi2 += w[i] * r * r;
  }
  const double dof = static_cast<double>(x.size()) - 2.0;
  fit.residual = chi2 / dof;
  // Absolute weights give the covariance directly; inflate it when the
  // scatter exceeds the quoted errors, and use the scatter alone otherwise.
  const double scale = absolute_weights ? std::max(1.0, fit.residual) : fit.residual;
  fit.slope_var = scale * s / delta;
  return fit;
}

}  // namespace

ScalingFit fit_scaling(std::span<const ScalingPoint> points, const FitOptions& options) {
  const std::size_t min_points = std::max<std::size_t>(options.min_points, 3);
  if (points.size() < min_points) {
    throw std::invalid_argument("scaling fit needs at least " + std::to_string(min_points) +
                                " points");
  }
  std::vector<ScalingPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScalingPoint& a, const ScalingPoint& b) { return a.n < b.n; });

  bool weighted = true;
  std::vector<double> x, y, w;
  for (const auto& pt : sorted) {
    if (!(pt.rate.mean > 0.0)) {
      throw std::invalid_argument("scaling fit needs positive rates; got " +
                                  std::to_string(pt.rate.mean) + " at n = " + std::to_string(pt.n));
    }
    if (!(pt.rate.std_error > 0.0)) weighted = false;
    x.push_back(pt.n);
    y.push_back(std::log(pt.rate.mean));
  }
  for (const auto& pt : sorted) {
    const double rel = pt.rate.std_error / pt.rate.mean;
    w.push_back(weighted ? 1.0 / (rel * rel) : 1.0);
  }

  std::size_t first = 0;
  LineFit fit;
  for (;;) {
    const std::size_t k = x.size() - first;
    fit = weighted_line(std::span(x).subspan(first), std::span(y).subspan(first),
                        std::span(w).subspan(first), weighted);
    if (!options.trim || !weighted || k <= min_points || fit.residual <= options.max_residual) break;
    ++first;
  }

  ScalingFit out;
  out.f = std::exp(fit.slope);
  out.g = std::exp(fit.intercept);
  out.f_std_error = out.f * std::sqrt(fit.slope_var);
  out.residual = fit.residual;
  out.n_min = x[first];
  out.n_max = x.back();
  out.points_used = x.size() - first;
  out.dropped = first;
  return out;
}

}  // namespace entroute
