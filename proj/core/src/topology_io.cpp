#include <json.hpp>

#include <stdexcept>

#include "entroute/topology.hpp"

namespace entroute {

using nlohmann::json;

std::string topology_to_json(const Topology& topology) {
  json doc;
  json& nodes = doc["nodes"] = json::array();
  for (const Node& n : topology.nodes()) {
    nodes.push_back({{"id", n.id}, {"x", n.coord.x}, {"y", n.coord.y}});
  }
  json& edges = doc["edges"] = json::array();
  for (const Edge& e : topology.edges()) {
    edges.push_back({{"id", e.id}, {"u", e.u}, {"v", e.v}, {"S", e.multiplicity}});
  }
  return doc.dump();
}

Topology topology_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("topology JSON: ") + err.what());
  }
  if (!doc.contains("nodes") || !doc.contains("edges")) {
    throw std::invalid_argument("topology JSON must contain \"nodes\" and \"edges\"");
  }
  try {
    std::vector<Node> nodes;
    for (const json& n : doc.at("nodes")) {
      nodes.push_back({n.at("id").get<NodeId>(), {n.at("x").get<int>(), n.at("y").get<int>()}});
    }
    std::vector<Edge> edges;
    for (const json& e : doc.at("edges")) {
      edges.push_back({e.at("id").get<EdgeId>(), e.at("u").get<NodeId>(), e.at("v").get<NodeId>(),
                       e.value("S", 1)});
    }
    return Topology(std::move(nodes), std::move(edges));
  } catch (const json::exception& err) {
    throw std::invalid_argument(std::string("topology JSON: ") + err.what());
  }
}

}  // namespace entroute
