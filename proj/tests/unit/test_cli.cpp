#include <doctest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "commands.hpp"
#include "output.hpp"
#include "run_config.hpp"

using namespace entroute::cli;
namespace fs = std::filesystem;

namespace {

json base_doc() {
  return json::parse(R"({
    "experiment": "rate-single",
    "topology": {"grid": {"width": 7, "height": 7}},
    "link": {"p": 0.7},
    "q": 0.9,
    "seed": 5,
    "trials": 2000,
    "flows": [{"alice": [1, 1], "bob": [4, 3]}]
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("entroute_cli_" + std::to_string(::getpid()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
};

std::string field_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("shortest round-trip doubles") {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-300, 123456789.125, -0.0, 5e-324}) {
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
    CHECK(std::signbit(back) == std::signbit(v));
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("csv table enforces the header width") {
  CsvTable t({"a", "b"});
  t.cell(1.5).empty();
  t.end_row();
  CHECK(t.str() == "a,b\n1.5,\n");
  t.cell(1.0);
  CHECK_THROWS_AS(t.end_row(), std::logic_error);
}

TEST_CASE("atomic write leaves no temp file") {
  TempDir dir;
  const fs::path out = dir.path / "x.txt";
  write_atomic(out.string(), "first");
  write_atomic(out.string(), "second");
  CHECK(slurp(out) == "second");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) files += e.is_regular_file();
  CHECK(files == 1);
  CHECK_THROWS(write_atomic((dir.path / "missing" / "y.txt").string(), "z"));
}

TEST_CASE("config defaults and echo round trip") {
  const RunConfig c = parse_config(base_doc());
  CHECK(c.trials == 2000);
  CHECK(c.workers == 0);
  CHECK(c.metric.kind == "L2");
  CHECK(c.rules == std::vector<std::string>{"global", "local"});
  CHECK(c.output == "-");
  const json echo = to_json(c);
  CHECK(to_json(parse_config(echo)) == echo);

  json d = base_doc();
  d["diagonal"] = {3, 4};
  d["link"] = {{"mode", "physical"}, {"alpha", 0.046}, {"length_km", 10.0}};
  const RunConfig r = parse_config(d);
  CHECK(r.placements == std::vector<std::array<int, 2>>{{2, 1}, {2, 2}});
  CHECK(to_json(parse_config(to_json(r))) == to_json(r));

  json no_trials = base_doc();
  no_trials.erase("trials");
  CHECK(parse_config(no_trials).trials == 100000);
}

TEST_CASE("config errors name the field") {
  auto with = [](const char* key, json v) {
    json d = base_doc();
    d[key] = std::move(v);
    return field_of(d);
  };
  json no_seed = base_doc();
  no_seed.erase("seed");
  CHECK(field_of(no_seed) == "seed");
  CHECK(with("seed", -3) == "seed");
  CHECK(with("q", 1.5) == "q");
  CHECK(with("trials", 0) == "trials");
  CHECK(with("typo", 1) == "typo");
  CHECK(with("experiment", "nope") == "experiment");
  CHECK(with("metric", "L7") == "metric");
  CHECK(with("link", json{{"mode", "direct"}}) == "link.p");
  CHECK(with("link", json{{"mode", "laser"}}) == "link.mode");
  CHECK(with("topology", json{{"grid", {{"width", 0}, {"height", 3}}}}) == "topology.grid.width");
  CHECK(with("flows", json::array({{{"alice", {0, 0}}}})) == "flows[0]");
  CHECK(with("rules", {"psychic"}) == "rules");
  CHECK(with("diagonal", {0}) == "diagonal");
}

TEST_CASE("overrides descend into objects") {
  json d = base_doc();
  apply_override(d, "link.p=0.25");
  apply_override(d, "trials=77");
  apply_override(d, "metric=L1");
  apply_override(d, "strategy.kind=\"multi-timeshare\"");
  CHECK(d["link"]["p"] == 0.25);
  CHECK(d["trials"] == 77);
  CHECK(d["metric"] == "L1");
  CHECK(d["strategy"]["kind"] == "multi-timeshare");
  CHECK_THROWS_AS(apply_override(d, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(d, "q.x=1"), ConfigError);
}

TEST_CASE("subcommand to experiment mapping") {
  CHECK(experiment_for("rate", json::object()) == "rate-single");
  CHECK(experiment_for("rate", json{{"diagonal", {2}}}) == "rate-vs-distance");
  CHECK(experiment_for("region", json::object()) == "rate-region");
  CHECK(experiment_for("metric-build", json::object()) == "metric-build");
  CHECK_THROWS_AS(experiment_for("heatmap", json{{"experiment", "scaling"}}), ConfigError);
}

TEST_CASE("placement around the anchor") {
  json d = base_doc();
  const RunConfig c = parse_config(d);
  const auto g = load_topology(c);
  const auto [a, b] = place_pair(g, c, {2, 2});
  CHECK(g.coord(a) == entroute::Coord{2, 2});
  CHECK(g.coord(b) == entroute::Coord{4, 4});
  CHECK_THROWS_AS(place_pair(g, c, {7, 0}), ConfigError);
}

TEST_CASE("runs are deterministic and outputs echo the config") {
  TempDir dir;
  json d = base_doc();
  d["experiment"] = "rate-vs-distance";
  d["diagonal"] = {2, 3};
  d["output"] = (dir.path / "a.csv").string();
  REQUIRE(run_experiment(parse_config(d)) == kExitOk);
  d["workers"] = 3;
  d["output"] = (dir.path / "b.csv").string();
  REQUIRE(run_experiment(parse_config(d)) == kExitOk);
  const std::string a = slurp(dir.path / "a.csv");
  CHECK(a == slurp(dir.path / "b.csv"));
  CHECK(a.rfind("n,X,Y,R_g,R_g_err,R_loc,R_loc_err,R_lin,R_optUB,R_optUB_err\n", 0) == 0);

  // Re-running the echoed config reproduces the data.
  json echo = json::parse(slurp(dir.path / "a.csv.meta.json")).at("config");
  echo["output"] = (dir.path / "c.csv").string();
  REQUIRE(run_experiment(parse_config(echo)) == kExitOk);
  CHECK(slurp(dir.path / "c.csv") == a);
}

TEST_CASE("json experiments") {
  TempDir dir;
  json d = base_doc();
  d["output"] = (dir.path / "r.json").string();
  REQUIRE(run_experiment(parse_config(d)) == kExitOk);
  const json r = json::parse(slurp(dir.path / "r.json"));
  CHECK(r.at("R_g").at("trials") == 2000);
  CHECK(r.at("R_optUB").at("mean").get<double>() >= r.at("R_g").at("mean").get<double>());
  CHECK(r.at("config") == to_json(parse_config(d)));

  d["experiment"] = "bounds";
  d["distances"] = {1, 5};
  d["output"] = (dir.path / "b.json").string();
  REQUIRE(run_experiment(parse_config(d)) == kExitOk);
  const json b = json::parse(slurp(dir.path / "b.json"));
  CHECK(b.at("min_cut").get<double>() == doctest::Approx(-4 * std::log2(0.3)));
  CHECK(b.at("local_lower_bound").at("at").size() == 2);

  d["experiment"] = "oracle-check";
  d["topology"] = {{"grid", {{"width", 3}, {"height", 2}}}};
  d["flows"] = json::array({{{"alice", 0}, {"bob", 5}}});
  d["trials"] = 40000;
  d["output"] = (dir.path / "o.json").string();
  CHECK(run_experiment(parse_config(d)) == kExitOk);
  const json o = json::parse(slurp(dir.path / "o.json"));
  CHECK(o.at("pass") == true);
  CHECK(o.at("checks").size() == 2);
}

TEST_CASE("region and heatmap csv layouts") {
  TempDir dir;
  json d = base_doc();
  d["experiment"] = "rate-region";
  d["topology"] = {{"grid", {{"width", 9}, {"height", 9}}}};
  d["flows"] = json::array({{{"alice", {2, 2}}, {"bob", {6, 2}}}, {{"alice", {2, 6}}, {"bob", {6, 6}}}});
  d["strategy"] = {{"kind", "multi-timeshare"}};
  d["knobs"] = {0.0, 0.5, 1.0};
  d["output"] = (dir.path / "r.csv").string();
  REQUIRE(run_experiment(parse_config(d)) == kExitOk);
  std::istringstream rows(slurp(dir.path / "r.csv"));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "knob,R1_mean,R1_stderr,R2_mean,R2_stderr");
  int n = 0;
  while (std::getline(rows, line)) ++n;
  CHECK(n == 3);

  d["knobs"] = json::array();
  CHECK_THROWS_AS(run_experiment(parse_config(d)), ConfigError);

  d["experiment"] = "heatmap";
  d["output"] = (dir.path / "h.csv").string();
  REQUIRE(run_experiment(parse_config(d)) == kExitOk);
  const std::string h = slurp(dir.path / "h.csv");
  CHECK(h.rfind("node_id,x,y,p_usage\n", 0) == 0);
  CHECK(std::count(h.begin(), h.end(), '\n') == 82);
}
