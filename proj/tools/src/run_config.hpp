#pragma once

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "entroute/link_model.hpp"
#include "entroute/mc_engine.hpp"
#include "entroute/multiflow.hpp"
#include "entroute/routing_local.hpp"
#include "entroute/topology.hpp"

namespace entroute::cli {

using nlohmann::json;

/// Invalid run configuration; `field` names the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A node given either by id or by grid coordinates [x, y].
struct NodeRef {
  std::optional<NodeId> id;
  Coord coord;

  NodeId resolve(const Topology& topology, const std::string& field) const;
};

struct TopologySpec {
  int width = 0;
  int height = 0;
  int multiplicity = 1;
  std::string file;  // JSON topology instead of a grid
};

struct LinkSpec {
  std::string mode = "direct";  // direct | channel | physical
  double p = 0.0;               // direct
  double p0 = 0.0;              // channel
  double alpha = 0.0;           // physical, per km
  std::vector<double> lengths_km;

  LinkModel model() const;
};

struct MetricSpec {
  std::string kind = "L2";  // L1 | L2 | file
  std::string file;
};

struct FlowRef {
  NodeRef alice;
  NodeRef bob;
};

struct StrategySpec {
  std::string kind = "spatial";  // single-timeshare | multi-timeshare | spatial
  std::string boundary = "axis";  // axis | wedge
  bool horizontal = true;
  bool flow1_low = true;
  std::array<double, 2> pivot{0.0, 0.0};
  double axis_angle_deg = 0.0;
};

struct MetricBuildSpec {
  std::string base = "L1";
  int iterations = 1;
  int max_offset = 12;
  int margin = 10;
};

struct RunConfig {
  std::string experiment;
  TopologySpec topology;
  LinkSpec link;
  double q = 1.0;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::optional<double> target_rel_stderr;
  MetricSpec metric;
  std::vector<FlowRef> flows;
  std::vector<std::array<int, 2>> placements;  // (X, Y) separations
  std::optional<std::array<int, 2>> anchor;    // pair midpoint; grid centre by default
  std::vector<std::string> rules;
  StrategySpec strategy;
  std::vector<double> knobs;
  MetricBuildSpec metric_build;
  std::vector<int> distances;  // bounds report
  std::string output = "-";
};

inline constexpr std::array<const char*, 7> kExperiments{
    "rate-single", "rate-vs-distance", "rate-region", "heatmap", "scaling", "bounds", "oracle-check"};

/// Parses and validates a configuration document, filling defaults. Throws
/// ConfigError. `metric-build` is accepted as an experiment as well.
RunConfig parse_config(const json& doc);

/// Fully resolved form; parse_config(to_json(c)) reproduces c.
json to_json(const RunConfig& config);

/// Applies `key=value` overrides to top-level fields; the value is parsed
/// as JSON when possible and taken as a string otherwise.
void apply_override(json& doc, const std::string& assignment);

Topology load_topology(const RunConfig& config);
DistanceMetric load_metric(const RunConfig& config, std::size_t node_count);
SimParams sim_params(const RunConfig& config);
Strategy strategy_family(const RunConfig& config);

/// Alice and Bob for a separation (X, Y) centred on the anchor.
std::pair<NodeId, NodeId> place_pair(const Topology& topology, const RunConfig& config,
                                     std::array<int, 2> separation);

}  // namespace entroute::cli
