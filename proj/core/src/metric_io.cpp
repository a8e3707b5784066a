#include <json.hpp>

#include <stdexcept>

#include "entroute/routing_local.hpp"

namespace entroute {

using nlohmann::json;

std::string metric_table_to_json(const Topology& topology, const DistanceMetric& metric,
                                 NodeId endpoint) {
  json doc;
  doc["endpoint"] = endpoint;
  json& entries = doc["entries"] = json::array();
  const auto d = metric.distances_to(topology, endpoint);
  for (NodeId n = 0; n < d.size(); ++n) entries.push_back({{"node", n}, {"d", d[n]}});
  return doc.dump();
}

DistanceMetric metric_tables_from_json(std::string_view text, std::size_t node_count) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("metric JSON: ") + err.what());
  }
  const json docs = doc.is_array() ? doc : json::array({doc});
  if (docs.empty()) throw std::invalid_argument("metric JSON holds no tables");

  std::optional<DistanceMetric> metric;
  try {
    for (const json& t : docs) {
      const auto endpoint = t.at("endpoint").get<NodeId>();
      if (endpoint >= node_count) throw std::invalid_argument("metric endpoint out of range");
      std::vector<double> d(node_count, -1.0);
      for (const json& e : t.at("entries")) {
        const auto n = e.at("node").get<NodeId>();
        if (n >= node_count) throw std::invalid_argument("metric entry node out of range");
        d[n] = e.at("d").get<double>();
      }
      for (double v : d) {
        if (v < 0.0) throw std::invalid_argument("metric table does not cover every node");
      }
      if (!metric) {
        metric = DistanceMetric::table(endpoint, std::move(d));
      } else {
        metric->add_table(endpoint, std::move(d));
      }
    }
  } catch (const json::exception& err) {
    throw std::invalid_argument(std::string("metric JSON: ") + err.what());
  }
  return *metric;
}

}  // namespace entroute
