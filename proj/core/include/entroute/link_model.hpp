#pragma once

#include <utility>
#include <vector>

#include "entroute/topology.hpp"

namespace entroute {

/// 1 - (1 - p0)^S: probability that at least one of S parallel channels
/// heralds an ebit. Throws std::invalid_argument for p0 outside [0, 1] or S < 1.
double link_success_prob(double p0, int multiplicity);

/// exp(-alpha * length). Throws std::invalid_argument for negative inputs.
double transmissivity(double alpha_per_km, double length_km);

/// How each edge's per-slot success probability p(e) is obtained.
class LinkModel {
 public:
  enum class Mode { direct, channel, physical };

  /// p(e) = p on every edge, independent of multiplicity.
  static LinkModel direct(double p);
  /// p(e) = 1 - (1 - p0)^S(e).
  static LinkModel channel(double p0);
  /// p0(e) = exp(-alpha L), then the channel formula with S(e).
  static LinkModel physical(double alpha_per_km, double length_km);
  /// Per-edge lengths, indexed by edge id.
  static LinkModel physical(double alpha_per_km, std::vector<double> lengths_km);

  Mode mode() const noexcept { return mode_; }
  double p() const noexcept { return value_; }  // p for direct, p0 for channel
  double alpha() const noexcept { return alpha_; }
  const std::vector<double>& lengths_km() const noexcept { return lengths_; }

  /// Per-channel transmissivity p0(e); for direct mode this is p.
  double channel_prob(const Topology& topology, EdgeId e) const;
  double edge_prob(const Topology& topology, EdgeId e) const;
  std::vector<double> edge_probs(const Topology& topology) const;

 private:
  LinkModel(Mode mode, double value, double alpha, std::vector<double> lengths)
      : mode_(mode), value_(value), alpha_(alpha), lengths_(std::move(lengths)) {}

  Mode mode_;
  double value_;
  double alpha_;
  std::vector<double> lengths_;  // one entry means uniform length
};

}  // namespace entroute
