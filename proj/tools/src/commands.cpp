#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <set>

#include "entroute/analysis.hpp"
#include "entroute/routing_global.hpp"
#include "output.hpp"

namespace entroute::cli {
namespace {

bool wants(const RunConfig& c, const char* rule) {
  return std::find(c.rules.begin(), c.rules.end(), rule) != c.rules.end();
}

FlowSpec flow_at(const Topology& g, const RunConfig& c, std::size_t i, const DistanceMetric& metric) {
  if (c.flows.size() <= i) throw ConfigError("flows", "need at least " + std::to_string(i + 1) + " flow(s)");
  const std::string where = "flows[" + std::to_string(i) + "]";
  const NodeId a = c.flows[i].alice.resolve(g, where + ".alice");
  const NodeId b = c.flows[i].bob.resolve(g, where + ".bob");
  if (a == b) throw ConfigError(where, "alice and bob coincide");
  return {a, b, metric};
}

double manhattan(const Topology& g, NodeId a, NodeId b) { return l1_distance(g.coord(a), g.coord(b)); }

// Common per-edge p, or NaN when edges differ.
double uniform_edge_prob(const Topology& g, const LinkModel& model) {
  const auto probs = model.edge_probs(g);
  if (probs.empty()) return std::numeric_limits<double>::quiet_NaN();
  for (double p : probs) {
    if (p != probs.front()) return std::numeric_limits<double>::quiet_NaN();
  }
  return probs.front();
}

double chain_rate_or_nan(double p, double q, double n) {
  if (std::isnan(p) || n < 1) return std::numeric_limits<double>::quiet_NaN();
  return linear_chain_rate(p, q, static_cast<int>(n));
}

void require_metric_covers(const DistanceMetric& m, NodeId endpoint) {
  if (!m.resolves(endpoint)) {
    throw ConfigError("metric.file", "no table for endpoint " + std::to_string(endpoint));
  }
}

// CSV outputs keep the config and trial counts in a sidecar next to the data.
void write_with_sidecar(const RunConfig& c, const std::string& body, json meta) {
  write_atomic(c.output, body);
  if (c.output == "-") return;
  meta["config"] = to_json(c);
  write_atomic(c.output + ".meta.json", meta.dump(2) + "\n");
}

void write_json(const RunConfig& c, json doc) {
  doc["config"] = to_json(c);
  write_atomic(c.output, doc.dump(2) + "\n");
}

int rate_single(const RunConfig& c) {
  const Topology g = load_topology(c);
  const DistanceMetric metric = load_metric(c, g.node_count());
  const FlowSpec flow = flow_at(g, c, 0, metric);
  const SimParams s = sim_params(c);
  json out;
  out["alice"] = flow.alice;
  out["bob"] = flow.bob;
  out["manhattan"] = manhattan(g, flow.alice, flow.bob);
  out["R_lin"] = chain_rate_or_nan(uniform_edge_prob(g, s.link), c.q, manhattan(g, flow.alice, flow.bob));
  if (wants(c, "global")) {
    const GlobalRates r = estimate_global_rates(g, s, flow.alice, flow.bob);
    out["R_g"] = estimate_json(r.greedy);
    out["R_optUB"] = estimate_json(r.optimal_ub);
  }
  if (wants(c, "local")) {
    if (metric.kind() == DistanceMetric::Kind::table) {
      require_metric_covers(metric, flow.alice);
      require_metric_covers(metric, flow.bob);
    }
    out["R_loc"] = estimate_json(estimate_R_loc(g, s, flow));
  }
  write_json(c, out);
  return kExitOk;
}

int rate_vs_distance(const RunConfig& c) {
  if (c.placements.empty()) throw ConfigError("placements", "rate-vs-distance needs placements or diagonal");
  const Topology g = load_topology(c);
  const DistanceMetric metric = load_metric(c, g.node_count());
  const SimParams base = sim_params(c);
  const double p_edge = uniform_edge_prob(g, base.link);

  CsvTable csv({"n", "X", "Y", "R_g", "R_g_err", "R_loc", "R_loc_err", "R_lin", "R_optUB", "R_optUB_err"});
  json rows = json::array();
  for (std::size_t i = 0; i < c.placements.size(); ++i) {
    const auto sep = c.placements[i];
    const auto [a, b] = place_pair(g, c, sep);
    SimParams s = base;
    s.seed = derive_key(c.seed, i);
    const int n = sep[0] + sep[1];
    json row{{"n", n}, {"alice", a}, {"bob", b}, {"seed", s.seed}};
    csv.cell(static_cast<long long>(n)).cell(static_cast<long long>(sep[0])).cell(static_cast<long long>(sep[1]));
    std::optional<GlobalRates> gr;
    if (wants(c, "global")) {
      gr = estimate_global_rates(g, s, a, b);
      csv.cell(gr->greedy.mean).cell(gr->greedy.std_error);
      row["R_g_trials"] = gr->greedy.trials;
    } else {
      csv.empty().empty();
    }
    if (wants(c, "local")) {
      if (metric.kind() == DistanceMetric::Kind::table) {
        require_metric_covers(metric, a);
        require_metric_covers(metric, b);
      }
      const RateEstimate r = estimate_R_loc(g, s, {a, b, metric});
      csv.cell(r.mean).cell(r.std_error);
      row["R_loc_trials"] = r.trials;
    } else {
      csv.empty().empty();
    }
    csv.cell(chain_rate_or_nan(p_edge, c.q, n));
    if (gr) {
      csv.cell(gr->optimal_ub.mean).cell(gr->optimal_ub.std_error);
    } else {
      csv.empty().empty();
    }
    csv.end_row();
    rows.push_back(row);
  }
  write_with_sidecar(c, csv.str(), {{"rows", rows}});
  return kExitOk;
}

int rate_region(const RunConfig& c) {
  if (c.flows.size() != 2) throw ConfigError("flows", "rate-region needs exactly two flows");
  if (c.knobs.empty()) throw ConfigError("knobs", "rate-region needs a non-empty knob grid");
  const Topology g = load_topology(c);
  const DistanceMetric metric = load_metric(c, g.node_count());
  const std::array<FlowSpec, 2> flows{flow_at(g, c, 0, metric), flow_at(g, c, 1, metric)};
  const Strategy family = strategy_family(c);
  std::vector<RateRegionPoint> pts;
  try {
    pts = sweep_rate_region(g, sim_params(c), flows, family, c.knobs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("knobs", e.what());
  }

  CsvTable csv({"knob", "R1_mean", "R1_stderr", "R2_mean", "R2_stderr"});
  json trials = json::array();
  for (const RateRegionPoint& p : pts) {
    csv.cell(p.knob).cell(p.r1.mean).cell(p.r1.std_error).cell(p.r2.mean).cell(p.r2.std_error);
    csv.end_row();
    trials.push_back(p.r1.trials);
  }
  json frontier = json::array();
  for (const auto& [r1, r2] : pareto_frontier(pts)) frontier.push_back({r1, r2});
  write_with_sidecar(c, csv.str(), {{"trials", trials}, {"pareto_frontier", frontier}});
  return kExitOk;
}

int heatmap(const RunConfig& c) {
  const Topology g = load_topology(c);
  const DistanceMetric metric = load_metric(c, g.node_count());
  const FlowSpec flow = flow_at(g, c, 0, metric);
  const auto usage = usage_heatmap(g, sim_params(c), flow);
  CsvTable csv({"node_id", "x", "y", "p_usage"});
  json stderrs = json::array();
  for (NodeId n = 0; n < g.node_count(); ++n) {
    const Coord xy = g.coord(n);
    csv.cell(static_cast<long long>(n)).cell(static_cast<long long>(xy.x)).cell(static_cast<long long>(xy.y));
    csv.cell(usage[n].mean);
    csv.end_row();
    stderrs.push_back(usage[n].std_error);
  }
  const std::uint64_t trials = usage.empty() ? 0 : usage.front().trials;
  write_with_sidecar(c, csv.str(), {{"trials", trials}, {"p_usage_stderr", stderrs}});
  return kExitOk;
}

json fit_json(const ScalingFit& f, double pq) {
  return {{"f", f.f},
          {"g", f.g},
          {"f_stderr", f.f_std_error},
          {"chi2_per_dof", f.residual},
          {"n_min", f.n_min},
          {"n_max", f.n_max},
          {"points_used", f.points_used},
          {"dropped", f.dropped},
          {"f_over_pq", std::isnan(pq) ? json(nullptr) : json(f.f / pq)}};
}

int scaling(const RunConfig& c) {
  if (c.placements.size() < 4) throw ConfigError("placements", "scaling needs at least four placements");
  const Topology g = load_topology(c);
  const DistanceMetric metric = load_metric(c, g.node_count());
  const SimParams base = sim_params(c);
  const double pq = uniform_edge_prob(g, base.link) * c.q;

  std::vector<ScalingPoint> local, global;
  json points = json::array();
  for (std::size_t i = 0; i < c.placements.size(); ++i) {
    const auto sep = c.placements[i];
    const auto [a, b] = place_pair(g, c, sep);
    SimParams s = base;
    s.seed = derive_key(c.seed, i);
    const double n = sep[0] + sep[1];
    json pt{{"n", n}, {"X", sep[0]}, {"Y", sep[1]}};
    if (wants(c, "local")) {
      local.push_back({n, estimate_R_loc(g, s, {a, b, metric})});
      pt["R_loc"] = estimate_json(local.back().rate);
    }
    if (wants(c, "global")) {
      global.push_back({n, estimate_R_g(g, s, a, b)});
      pt["R_g"] = estimate_json(global.back().rate);
    }
    points.push_back(pt);
  }
  json fits;
  try {
    if (!local.empty()) fits["local"] = fit_json(fit_scaling(local), pq);
    if (!global.empty()) fits["global"] = fit_json(fit_scaling(global), pq);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("placements", std::string("fit failed: ") + e.what());
  }
  write_json(c, {{"points", points}, {"fits", fits}, {"pq", std::isnan(pq) ? json(nullptr) : json(pq)}});
  return kExitOk;
}

int bounds(const RunConfig& c) {
  const Topology g = load_topology(c);
  const FlowSpec flow = flow_at(g, c, 0, DistanceMetric::l2());
  const LinkModel model = sim_params(c).link;
  json out;
  out["alice"] = flow.alice;
  out["bob"] = flow.bob;
  try {
    out["min_cut"] = min_cut_upper_bound(g, model, flow.alice, flow.bob);
    out["min_cut_per_channel"] = min_cut_upper_bound(g, model, flow.alice, flow.bob, true);
  } catch (const std::invalid_argument& e) {
    out["min_cut"] = nullptr;
    out["min_cut_per_channel"] = nullptr;
    out["min_cut_note"] = e.what();
  }

  // Point-to-point reference for every distinct per-channel transmissivity.
  std::set<double> etas;
  for (EdgeId e = 0; e < g.edge_count(); ++e) etas.insert(model.channel_prob(g, e));
  json refs = json::array();
  for (double eta : etas) {
    json r{{"eta", eta}, {"linear_1_44_eta", 1.44 * eta}};
    r["capacity"] = eta < 1.0 ? json(repeaterless_capacity(eta)) : json(nullptr);
    refs.push_back(r);
  }
  out["repeaterless"] = refs;

  const double p = uniform_edge_prob(g, model);
  std::vector<int> ns = c.distances;
  if (ns.empty()) ns.push_back(static_cast<int>(manhattan(g, flow.alice, flow.bob)));
  json lower = nullptr;
  if (!std::isnan(p)) {
    try {
      const LowerBoundTerms t = lower_bound_terms(p, c.q);
      lower = {{"p_prime", t.p_prime}, {"beta", t.beta}, {"per_hop", t.per_hop}};
      json at = json::array();
      for (int n : ns) {
        at.push_back({{"n", n}, {"lower_bound", analytic_lower_bound(p, c.q, n)}, {"R_lin", linear_chain_rate(p, c.q, n)}});
      }
      lower["at"] = at;
    } catch (const std::domain_error& e) {
      lower = {{"note", e.what()}};
    }
  }
  out["local_lower_bound"] = lower;
  write_json(c, out);
  return kExitOk;
}

int oracle_check(const RunConfig& c) {
  const Topology g = load_topology(c);
  const DistanceMetric metric = load_metric(c, g.node_count());
  const FlowSpec flow = flow_at(g, c, 0, metric);
  const SimParams s = sim_params(c);
  if (g.edge_count() > kOracleMaxEdges) {
    throw ConfigError("topology", "oracle enumeration supports at most " + std::to_string(kOracleMaxEdges) + " edges");
  }
  json checks = json::array();
  bool ok = true;
  for (const std::string& rule : c.rules) {
    const bool global = rule == "global";
    const double exact = exact_rate_oracle(g, s.link, c.q, global ? OracleRule::global() : OracleRule::local(metric),
                                           flow.alice, flow.bob);
    const RateEstimate mc = global ? estimate_R_g(g, s, flow.alice, flow.bob) : estimate_R_loc(g, s, flow);
    const double diff = mc.mean - exact;
    double z = 0.0;
    if (mc.std_error > 0.0) {
      z = diff / mc.std_error;
    } else if (std::abs(diff) > 1e-12) {
      z = std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    const bool pass = std::abs(z) <= kOracleZLimit;
    ok = ok && pass;
    checks.push_back({{"rule", rule},
                      {"exact", exact},
                      {"mc", estimate_json(mc)},
                      {"z", std::isinf(z) ? json(z > 0 ? "inf" : "-inf") : json(z)},
                      {"pass", pass}});
  }
  write_json(c, {{"checks", checks}, {"z_limit", kOracleZLimit}, {"pass", ok}});
  return ok ? kExitOk : kExitOracleMismatch;
}

int metric_build(const RunConfig& c) {
  const Topology g = load_topology(c);
  const SimParams s = sim_params(c);
  std::vector<NodeId> endpoints;
  for (std::size_t i = 0; i < c.flows.size(); ++i) {
    const FlowSpec f = flow_at(g, c, i, DistanceMetric::l2());
    for (NodeId e : {f.alice, f.bob}) {
      if (std::find(endpoints.begin(), endpoints.end(), e) == endpoints.end()) endpoints.push_back(e);
    }
  }
  if (endpoints.empty()) throw ConfigError("flows", "metric-build needs at least one flow");
  const MetricBuildSpec& mb = c.metric_build;
  DistanceMetric metric = mb.base == "L1" ? DistanceMetric::l1() : DistanceMetric::l2();

  if (g.grid_dims()) {
    // Translation invariance: one probe grid per offset instead of one run per node.
    for (int it = 0; it < mb.iterations; ++it) {
      SimParams si = s;
      si.seed = derive_key(c.seed, it);
      metric = build_offset_metric(si, metric, mb.max_offset, mb.margin);
    }
  } else {
    if (mb.iterations != 1) {
      throw ConfigError("metric_build.iterations", "only one iteration is supported off the grid");
    }
    std::optional<DistanceMetric> tables;
    for (NodeId e : endpoints) {
      const DistanceMetric one = build_recursive_metric(g, s, metric, e);
      if (!tables) {
        tables = one;
      } else {
        tables->add_table(e, one.tables().at(e));
      }
    }
    metric = *tables;
  }

  json docs = json::array();
  for (NodeId e : endpoints) docs.push_back(json::parse(metric_table_to_json(g, metric, e)));
  json meta{{"endpoints", endpoints}};
  if (const auto& off = metric.offsets()) {
    meta["offset_table"] = {{"max_dx", off->max_dx}, {"max_dy", off->max_dy}, {"values", off->values}, {"beyond", off->beyond}};
  }
  write_with_sidecar(c, docs.dump() + "\n", meta);
  return kExitOk;
}

}  // namespace

std::string experiment_for(const std::string& subcommand, const json& doc) {
  const std::string given = doc.contains("experiment") && doc.at("experiment").is_string()
                                ? doc.at("experiment").get<std::string>()
                                : "";
  std::string expected;
  if (subcommand == "rate") {
    if (given == "rate-single" || given == "rate-vs-distance") return given;
    if (!given.empty()) throw ConfigError("experiment", "'" + given + "' cannot run under 'rate'");
    return doc.contains("placements") || doc.contains("diagonal") ? "rate-vs-distance" : "rate-single";
  }
  if (subcommand == "region") expected = "rate-region";
  else expected = subcommand;
  if (!given.empty() && given != expected) {
    throw ConfigError("experiment", "'" + given + "' cannot run under '" + subcommand + "'");
  }
  return expected;
}

int run_experiment(const RunConfig& c) {
  const std::string& e = c.experiment;
  if (e == "rate-single") return rate_single(c);
  if (e == "rate-vs-distance") return rate_vs_distance(c);
  if (e == "rate-region") return rate_region(c);
  if (e == "heatmap") return heatmap(c);
  if (e == "scaling") return scaling(c);
  if (e == "bounds") return bounds(c);
  if (e == "oracle-check") return oracle_check(c);
  if (e == "metric-build") return metric_build(c);
  throw ConfigError("experiment", "unknown experiment '" + e + "'");
}

}  // namespace entroute::cli
