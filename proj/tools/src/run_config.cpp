#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace entroute::cli {
namespace {

std::string read_file(const std::string& path, const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(field, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const json& require_object(const json& v, const std::string& field) {
  if (!v.is_object()) throw ConfigError(field, "expected an object");
  return v;
}

template <class T>
T get_as(const json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field, "wrong type");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return get_as<T>(*it, where.empty() ? key : where + "." + key);
}

double probability(const json& obj, const char* key, const std::string& where, bool required) {
  const std::string field = where.empty() ? key : where + "." + key;
  if (!obj.contains(key)) {
    if (required) throw ConfigError(field, "missing");
    return 0.0;
  }
  if (!obj.at(key).is_number()) throw ConfigError(field, "expected a number");
  const double v = obj.at(key).get<double>();
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(field, "must lie in [0, 1]");
  return v;
}

std::array<int, 2> int_pair(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ConfigError(field, "expected [int, int]");
  }
  return {v[0].get<int>(), v[1].get<int>()};
}

NodeRef node_ref(const json& v, const std::string& field) {
  NodeRef r;
  if (v.is_number_integer()) {
    if (v.get<long long>() < 0) throw ConfigError(field, "node id must be >= 0");
    r.id = v.get<NodeId>();
  } else {
    const auto xy = int_pair(v, field);
    r.coord = {xy[0], xy[1]};
  }
  return r;
}

json node_ref_json(const NodeRef& r) {
  if (r.id) return *r.id;
  return json::array({r.coord.x, r.coord.y});
}

bool valid_experiment(const std::string& e) {
  return e == "metric-build" || std::find(kExperiments.begin(), kExperiments.end(), e) != kExperiments.end();
}

}  // namespace

NodeId NodeRef::resolve(const Topology& topology, const std::string& field) const {
  if (id) {
    if (*id >= topology.node_count()) throw ConfigError(field, "node id out of range");
    return *id;
  }
  const auto found = topology.find(coord);
  if (!found) {
    throw ConfigError(field, "no node at [" + std::to_string(coord.x) + ", " + std::to_string(coord.y) + "]");
  }
  return *found;
}

LinkModel LinkSpec::model() const {
  if (mode == "direct") return LinkModel::direct(p);
  if (mode == "channel") return LinkModel::channel(p0);
  if (lengths_km.size() == 1) return LinkModel::physical(alpha, lengths_km[0]);
  return LinkModel::physical(alpha, lengths_km);
}

RunConfig parse_config(const json& doc) {
  require_object(doc, "<root>");
  reject_unknown(doc, "",
                 {"experiment", "topology", "link", "q", "trials", "seed", "workers", "target_rel_stderr",
                  "metric", "flows", "placements", "diagonal", "anchor", "rules", "strategy", "knobs",
                  "metric_build", "distances", "output"});
  RunConfig c;

  c.experiment = get_or<std::string>(doc, "experiment", "", "");
  if (!valid_experiment(c.experiment)) throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");

  // topology
  if (!doc.contains("topology")) throw ConfigError("topology", "missing");
  const json& topo = require_object(doc.at("topology"), "topology");
  reject_unknown(topo, "topology", {"grid", "file"});
  if (topo.contains("file")) {
    if (topo.contains("grid")) throw ConfigError("topology", "give either grid or file");
    c.topology.file = get_as<std::string>(topo.at("file"), "topology.file");
  } else if (topo.contains("grid")) {
    const json& grid = require_object(topo.at("grid"), "topology.grid");
    reject_unknown(grid, "topology.grid", {"width", "height", "S"});
    c.topology.width = get_or<int>(grid, "width", 0, "topology.grid");
    c.topology.height = get_or<int>(grid, "height", 0, "topology.grid");
    c.topology.multiplicity = get_or<int>(grid, "S", 1, "topology.grid");
    if (c.topology.width < 1) throw ConfigError("topology.grid.width", "must be >= 1");
    if (c.topology.height < 1) throw ConfigError("topology.grid.height", "must be >= 1");
    if (c.topology.multiplicity < 1) throw ConfigError("topology.grid.S", "must be >= 1");
  } else {
    throw ConfigError("topology", "give either grid or file");
  }

  // link model
  if (!doc.contains("link")) throw ConfigError("link", "missing");
  const json& link = require_object(doc.at("link"), "link");
  reject_unknown(link, "link", {"mode", "p", "p0", "alpha", "length_km", "lengths_km"});
  c.link.mode = get_or<std::string>(link, "mode", "direct", "link");
  if (c.link.mode == "direct") {
    c.link.p = probability(link, "p", "link", true);
  } else if (c.link.mode == "channel") {
    c.link.p0 = probability(link, "p0", "link", true);
  } else if (c.link.mode == "physical") {
    c.link.alpha = get_or<double>(link, "alpha", -1.0, "link");
    if (!(c.link.alpha >= 0.0)) throw ConfigError("link.alpha", "missing or negative");
    if (link.contains("length_km")) {
      c.link.lengths_km = {get_as<double>(link.at("length_km"), "link.length_km")};
    } else {
      c.link.lengths_km = get_or<std::vector<double>>(link, "lengths_km", {}, "link");
    }
    if (c.link.lengths_km.empty()) throw ConfigError("link.length_km", "missing");
    for (double l : c.link.lengths_km) {
      if (!(l >= 0.0)) throw ConfigError("link.lengths_km", "lengths must be >= 0");
    }
  } else {
    throw ConfigError("link.mode", "expected direct, channel or physical");
  }

  if (!doc.contains("q")) throw ConfigError("q", "missing");
  c.q = probability(doc, "q", "", true);

  if (!doc.contains("seed") || !doc.at("seed").is_number_integer() ||
      (!doc.at("seed").is_number_unsigned() && doc.at("seed").get<long long>() < 0)) {
    throw ConfigError("seed", "required non-negative integer");
  }
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.trials = get_or<std::uint64_t>(doc, "trials", 100000, "");
  if (c.trials == 0) throw ConfigError("trials", "must be >= 1");
  c.workers = get_or<unsigned>(doc, "workers", 0u, "");
  if (doc.contains("target_rel_stderr") && !doc.at("target_rel_stderr").is_null()) {
    const double t = get_as<double>(doc.at("target_rel_stderr"), "target_rel_stderr");
    if (!(t > 0.0)) throw ConfigError("target_rel_stderr", "must be > 0");
    c.target_rel_stderr = t;
  }

  // metric: "L1", "L2" or {"file": path}
  if (doc.contains("metric")) {
    const json& m = doc.at("metric");
    if (m.is_string()) {
      c.metric.kind = m.get<std::string>();
      if (c.metric.kind != "L1" && c.metric.kind != "L2") throw ConfigError("metric", "expected L1, L2 or {file}");
    } else if (m.is_object()) {
      reject_unknown(m, "metric", {"file"});
      c.metric.kind = "file";
      c.metric.file = get_or<std::string>(m, "file", "", "metric");
      if (c.metric.file.empty()) throw ConfigError("metric.file", "missing");
    } else {
      throw ConfigError("metric", "expected L1, L2 or {file}");
    }
  }

  if (doc.contains("flows")) {
    const json& flows = doc.at("flows");
    if (!flows.is_array()) throw ConfigError("flows", "expected an array");
    for (std::size_t i = 0; i < flows.size(); ++i) {
      const std::string where = "flows[" + std::to_string(i) + "]";
      const json& f = require_object(flows[i], where);
      reject_unknown(f, where, {"alice", "bob"});
      if (!f.contains("alice") || !f.contains("bob")) throw ConfigError(where, "needs alice and bob");
      c.flows.push_back({node_ref(f.at("alice"), where + ".alice"), node_ref(f.at("bob"), where + ".bob")});
    }
  }

  if (doc.contains("placements")) {
    const json& pl = doc.at("placements");
    if (!pl.is_array()) throw ConfigError("placements", "expected an array of [X, Y]");
    for (std::size_t i = 0; i < pl.size(); ++i) {
      c.placements.push_back(int_pair(pl[i], "placements[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("diagonal")) {
    // n hops split as evenly as possible between the axes
    for (int n : get_as<std::vector<int>>(doc.at("diagonal"), "diagonal")) {
      if (n < 1) throw ConfigError("diagonal", "distances must be >= 1");
      c.placements.push_back({n - n / 2, n / 2});
    }
  }
  for (const auto& s : c.placements) {
    if (s[0] < 0 || s[1] < 0 || s[0] + s[1] == 0) throw ConfigError("placements", "separations must be >= 0 and not both 0");
  }
  if (doc.contains("anchor") && !doc.at("anchor").is_null()) c.anchor = int_pair(doc.at("anchor"), "anchor");

  c.rules = get_or<std::vector<std::string>>(doc, "rules", {}, "");
  for (const std::string& r : c.rules) {
    if (r != "global" && r != "local") throw ConfigError("rules", "expected global or local, got '" + r + "'");
  }
  if (c.rules.empty()) {
    c.rules = c.experiment == "scaling" ? std::vector<std::string>{"local"}
                                        : std::vector<std::string>{"global", "local"};
  }

  if (doc.contains("strategy")) {
    const json& s = require_object(doc.at("strategy"), "strategy");
    reject_unknown(s, "strategy", {"kind", "boundary", "horizontal", "flow1_low", "pivot", "axis_angle_deg"});
    c.strategy.kind = get_or<std::string>(s, "kind", "spatial", "strategy");
    if (c.strategy.kind != "single-timeshare" && c.strategy.kind != "multi-timeshare" && c.strategy.kind != "spatial") {
      throw ConfigError("strategy.kind", "expected single-timeshare, multi-timeshare or spatial");
    }
    c.strategy.boundary = get_or<std::string>(s, "boundary", "axis", "strategy");
    if (c.strategy.boundary != "axis" && c.strategy.boundary != "wedge") {
      throw ConfigError("strategy.boundary", "expected axis or wedge");
    }
    c.strategy.horizontal = get_or<bool>(s, "horizontal", true, "strategy");
    c.strategy.flow1_low = get_or<bool>(s, "flow1_low", true, "strategy");
    c.strategy.pivot = get_or<std::array<double, 2>>(s, "pivot", {0.0, 0.0}, "strategy");
    c.strategy.axis_angle_deg = get_or<double>(s, "axis_angle_deg", 0.0, "strategy");
  }
  c.knobs = get_or<std::vector<double>>(doc, "knobs", {}, "");

  if (doc.contains("metric_build")) {
    const json& mb = require_object(doc.at("metric_build"), "metric_build");
    reject_unknown(mb, "metric_build", {"base", "iterations", "max_offset", "margin"});
    c.metric_build.base = get_or<std::string>(mb, "base", "L1", "metric_build");
    if (c.metric_build.base != "L1" && c.metric_build.base != "L2") {
      throw ConfigError("metric_build.base", "expected L1 or L2");
    }
    c.metric_build.iterations = get_or<int>(mb, "iterations", 1, "metric_build");
    c.metric_build.max_offset = get_or<int>(mb, "max_offset", 12, "metric_build");
    c.metric_build.margin = get_or<int>(mb, "margin", 10, "metric_build");
    if (c.metric_build.iterations < 1) throw ConfigError("metric_build.iterations", "must be >= 1");
    if (c.metric_build.max_offset < 1) throw ConfigError("metric_build.max_offset", "must be >= 1");
    if (c.metric_build.margin < 0) throw ConfigError("metric_build.margin", "must be >= 0");
  }

  c.distances = get_or<std::vector<int>>(doc, "distances", {}, "");
  for (int n : c.distances) {
    if (n < 1) throw ConfigError("distances", "distances must be >= 1");
  }
  c.output = get_or<std::string>(doc, "output", "-", "");
  if (c.output.empty()) throw ConfigError("output", "must not be empty");
  return c;
}

json to_json(const RunConfig& c) {
  json doc;
  doc["experiment"] = c.experiment;
  if (c.topology.file.empty()) {
    doc["topology"] = {{"grid", {{"width", c.topology.width}, {"height", c.topology.height}, {"S", c.topology.multiplicity}}}};
  } else {
    doc["topology"] = {{"file", c.topology.file}};
  }
  json link{{"mode", c.link.mode}};
  if (c.link.mode == "direct") link["p"] = c.link.p;
  if (c.link.mode == "channel") link["p0"] = c.link.p0;
  if (c.link.mode == "physical") {
    link["alpha"] = c.link.alpha;
    link["lengths_km"] = c.link.lengths_km;
  }
  doc["link"] = link;
  doc["q"] = c.q;
  doc["trials"] = c.trials;
  doc["seed"] = c.seed;
  doc["workers"] = c.workers;
  doc["target_rel_stderr"] = c.target_rel_stderr ? json(*c.target_rel_stderr) : json(nullptr);
  doc["metric"] = c.metric.kind == "file" ? json{{"file", c.metric.file}} : json(c.metric.kind);
  doc["flows"] = json::array();
  for (const FlowRef& f : c.flows) {
    doc["flows"].push_back({{"alice", node_ref_json(f.alice)}, {"bob", node_ref_json(f.bob)}});
  }
  doc["placements"] = json::array();
  for (const auto& s : c.placements) doc["placements"].push_back(json::array({s[0], s[1]}));
  doc["anchor"] = c.anchor ? json::array({(*c.anchor)[0], (*c.anchor)[1]}) : json(nullptr);
  doc["rules"] = c.rules;
  doc["strategy"] = {{"kind", c.strategy.kind},
                     {"boundary", c.strategy.boundary},
                     {"horizontal", c.strategy.horizontal},
                     {"flow1_low", c.strategy.flow1_low},
                     {"pivot", c.strategy.pivot},
                     {"axis_angle_deg", c.strategy.axis_angle_deg}};
  doc["knobs"] = c.knobs;
  doc["metric_build"] = {{"base", c.metric_build.base},
                         {"iterations", c.metric_build.iterations},
                         {"max_offset", c.metric_build.max_offset},
                         {"margin", c.metric_build.margin}};
  doc["distances"] = c.distances;
  doc["output"] = c.output;
  return doc;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  // dotted keys descend into objects: link.p=0.7
  json* target = &doc;
  std::size_t start = 0;
  for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
    json& next = (*target)[key.substr(start, dot - start)];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError(key, "cannot descend into a non-object");
    target = &next;
  }
  (*target)[key.substr(start)] = std::move(value);
}

Topology load_topology(const RunConfig& c) {
  if (c.topology.file.empty()) return build_grid(c.topology.width, c.topology.height, c.topology.multiplicity);
  try {
    return topology_from_json(read_file(c.topology.file, "topology.file"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("topology.file", e.what());
  }
}

DistanceMetric load_metric(const RunConfig& c, std::size_t node_count) {
  if (c.metric.kind == "L1") return DistanceMetric::l1();
  if (c.metric.kind == "L2") return DistanceMetric::l2();
  try {
    return metric_tables_from_json(read_file(c.metric.file, "metric.file"), node_count);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("metric.file", e.what());
  }
}

SimParams sim_params(const RunConfig& c) {
  SimParams s;
  try {
    s.link = c.link.model();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("link", e.what());
  }
  s.q = c.q;
  s.trials = c.trials;
  s.seed = c.seed;
  s.workers = c.workers;
  s.target_rel_stderr = c.target_rel_stderr;
  return s;
}

Strategy strategy_family(const RunConfig& c) {
  const StrategySpec& s = c.strategy;
  if (s.kind == "single-timeshare") return Strategy::single_flow_timeshare(0.5);
  if (s.kind == "multi-timeshare") return Strategy::multi_flow_timeshare(0.5);
  if (s.boundary == "axis") return Strategy::spatial_division(Boundary::axis_line(s.horizontal, 0.0, s.flow1_low));
  return Strategy::spatial_division(Boundary::wedge(s.pivot[0], s.pivot[1], s.axis_angle_deg, 45.0));
}

std::pair<NodeId, NodeId> place_pair(const Topology& topology, const RunConfig& c, std::array<int, 2> sep) {
  std::array<int, 2> mid{0, 0};
  if (c.anchor) {
    mid = *c.anchor;
  } else if (const auto dims = topology.grid_dims()) {
    mid = {dims->first / 2, dims->second / 2};
  } else {
    throw ConfigError("anchor", "required for non-grid topologies");
  }
  const Coord a{mid[0] - sep[0] / 2, mid[1] - sep[1] / 2};
  const Coord b{a.x + sep[0], a.y + sep[1]};
  const auto na = topology.find(a);
  const auto nb = topology.find(b);
  if (!na || !nb) {
    throw ConfigError("placements", "separation [" + std::to_string(sep[0]) + ", " + std::to_string(sep[1]) +
                                        "] does not fit around the anchor");
  }
  return {*na, *nb};
}

}  // namespace entroute::cli
