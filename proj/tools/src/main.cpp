#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "run_config.hpp"

using namespace entroute::cli;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<unsigned> workers;
  std::optional<double> q;
  std::optional<double> p;
  std::optional<std::string> output;
  std::vector<std::string> sets;
};

// One line, tab-free, so scripts can split on ": ".
int fail(const std::string& kind, const std::string& field, const std::string& message) {
  std::string text = message;
  for (char& ch : text) {
    if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
  }
  std::cerr << "error: " << kind << ": " << field << ": " << text << "\n";
  return kExitConfig;
}

json load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  json doc = json::parse(ss.str(), nullptr, false);
  if (doc.is_discarded()) throw ConfigError("--config", "'" + path + "' is not valid JSON");
  return doc;
}

int run(const std::string& subcommand, const Overrides& o) {
  json doc = load_document(o.config_path);
  if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
  for (const std::string& s : o.sets) apply_override(doc, s);
  if (o.seed) doc["seed"] = *o.seed;
  if (o.trials) doc["trials"] = *o.trials;
  if (o.workers) doc["workers"] = *o.workers;
  if (o.q) doc["q"] = *o.q;
  if (o.p) {
    doc["link"]["mode"] = "direct";
    doc["link"]["p"] = *o.p;
  }
  if (o.output) doc["output"] = *o.output;
  doc["experiment"] = experiment_for(subcommand, doc);
  return run_experiment(parse_config(doc));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entroute: entanglement routing simulations on repeater networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "entroute 0.1.0");

  Overrides o;
  const std::vector<std::pair<const char*, const char*>> subcommands{
      {"rate", "R_g, R_loc, R_lin and the optimal-rule bound for one pair or a distance sweep"},
      {"region", "two-flow rate region over a knob grid"},
      {"heatmap", "per-node usage probability for one flow"},
      {"scaling", "fit rate ~ g f^n over a distance sweep"},
      {"bounds", "min-cut, repeaterless and analytic local-rule bounds"},
      {"oracle-check", "compare Monte Carlo against exact enumeration on a small graph"},
      {"metric-build", "build recursive distance tables for the local rule"},
  };
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", o.config_path, "JSON run configuration")->required();
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--trials", o.trials, "Monte Carlo trials per estimate");
    sub->add_option("--workers", o.workers, "worker threads (0: ENTROUTE_WORKERS or all cores)");
    sub->add_option("--q", o.q, "BSM success probability");
    sub->add_option("--p", o.p, "uniform link success probability (direct mode)");
    sub->add_option("-o,--output", o.output, "output path, '-' for stdout");
    sub->add_option("--set", o.sets, "override a config field: key=value, value parsed as JSON");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", "<args>", e.what());
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    return run(subcommand, o);
  } catch (const ConfigError& e) {
    return fail("config", e.field(), e.what());
  } catch (const std::invalid_argument& e) {
    return fail("config", "<run>", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", "<run>", e.what());
  }
}
