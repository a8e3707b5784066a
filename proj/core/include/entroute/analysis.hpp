#pragma once

#include <cstddef>
#include <span>

#include "entroute/link_model.hpp"
#include "entroute/mc_engine.hpp"
#include "entroute/routing_local.hpp"
#include "entroute/topology.hpp"

namespace entroute {

/// p^n q^(n-1): one ebit over an n-hop chain with every link and swap needed.
double linear_chain_rate(double p, double q, int n);

/// -log2(1 - eta): repeaterless entanglement capacity of a pure-loss link.
double repeaterless_capacity(double eta);

/// Minimum Alice-Bob cut with edge capacity -log2(1 - p(e)). With
/// `per_channel`, capacity is -S(e) log2(1 - p0(e)) instead. Throws
/// std::invalid_argument on an edge whose capacity would be infinite.
double min_cut_upper_bound(const Topology& topology, const LinkModel& model, NodeId alice,
                           NodeId bob, bool per_channel = false);

/// Constants behind the local-rule lower bound (pq)^(beta n) / q.
struct LowerBoundTerms {
  double p_prime = 0.0;  // p + p^3 (1-p)^5 q^2
  double beta = 0.0;     // log(sqrt(p' p) q) / log(p q)
  double per_hop = 0.0;  // (p q)^beta = sqrt(p' p) q
};

/// Throws std::domain_error unless 0 < p < 1 and 0 < q < 1 (beta is 0/0 or
/// undefined on the boundary).
LowerBoundTerms lower_bound_terms(double p, double q);
double analytic_lower_bound(double p, double q, int n);

struct ScalingPoint {
  double n = 0.0;  // Alice-Bob Manhattan distance
  RateEstimate rate;
};

/// rate ~ g f^n over the retained distance range.
struct ScalingFit {
  double f = 0.0;
  double g = 0.0;
  double f_std_error = 0.0;
  double residual = 0.0;  // chi^2 per degree of freedom (RSS per dof when unweighted)
  double n_min = 0.0;
  double n_max = 0.0;
  std::size_t points_used = 0;
  std::size_t dropped = 0;  // smallest-n points trimmed as pre-asymptotic
};

struct FitOptions {
  bool trim = true;
  double max_residual = 2.0;
  std::size_t min_points = 4;
};

/// Weighted least squares of log(rate) against n with delta-method weights
/// (stderr / mean)^-2; unweighted when any stderr is zero. Trims from the
/// small-n end while the residual exceeds `max_residual`. Throws
/// std::invalid_argument for fewer than min_points points or a nonpositive mean.
ScalingFit fit_scaling(std::span<const ScalingPoint> points, const FitOptions& options = {});

struct OracleRule {
  enum class Kind { global_greedy, local };
  Kind kind = Kind::global_greedy;
  DistanceMetric metric = DistanceMetric::l2();

  static OracleRule global() { return {}; }
  static OracleRule local(DistanceMetric metric) { return {Kind::local, std::move(metric)}; }
};

inline constexpr std::size_t kOracleMaxEdges = 13;

/// Exact expected ebits per slot by enumerating all 2^|E| external outcomes
/// and, for the local rule, every equally likely tie-break branch.
double exact_rate_oracle(const Topology& topology, const LinkModel& model, double q,
                         const OracleRule& rule, NodeId alice, NodeId bob);

}  // namespace entroute
