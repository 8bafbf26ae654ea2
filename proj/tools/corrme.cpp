// Command-line front end: simulate, generators, converge, verify.
//
// Exit codes: 0 success, 1 configuration error, 2 a property check failed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "corrme/scenarios.hpp"

namespace fs = std::filesystem;
using namespace corrme;

namespace {

struct Options {
  std::string config;
  std::string scenario;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  bool states = false;
};

ScenarioConfig load(const Options& o) {
  Json j = Json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config '" + o.config + "'");
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if (!o.scenario.empty()) j["scenario"] = o.scenario;
  if (j.empty()) throw ConfigError("need --config or --scenario");
  auto sc = parse_scenario(j);
  if (o.seed) sc.seed = *o.seed;
  return sc;
}

std::ofstream open_out(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  const auto path = fs::path(o.out) / name;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  std::cout << "wrote " << path.string() << '\n';
  return f;
}

void write_trajectory(const Options& o, const std::string& stem, const Trajectory& t) {
  if (o.format == "json") {
    open_out(o, stem + ".json") << trajectory_to_json(t, o.states).dump(2) << '\n';
  } else {
    auto f = open_out(o, stem + ".csv");
    write_csv(f, t);
  }
}

int cmd_simulate(const Options& o) {
  const auto sc = load(o);
  const auto out = run_simulate(sc);
  write_trajectory(o, "trajectory", out.collision);
  if (!out.master_equation.samples.empty()) write_trajectory(o, "me_trajectory", out.master_equation);
  const auto& last = out.collision.back();
  std::cout << sc.name << ": " << out.collision.samples.size() << " samples, final trace "
            << last.trace << ", min eigenvalue " << last.min_eigenvalue << '\n';
  return 0;
}

int cmd_generators(const Options& o) {
  const auto sc = load(o);
  const auto gen = run_generators(sc);
  if (o.format == "json") {
    open_out(o, "generators.json") << generators_to_json(gen).dump(2) << '\n';
  } else {
    auto f = open_out(o, "rates.csv");
    write_rate_table(f, gen.rates);
  }
  return 0;
}

int cmd_converge(const Options& o) {
  const auto sc = load(o);
  const auto rep = run_converge(sc);
  if (o.format == "json") {
    open_out(o, "convergence.json") << convergence_to_json(rep).dump(2) << '\n';
  } else {
    auto f = open_out(o, "convergence.csv");
    write_convergence_csv(f, rep);
  }
  for (const auto& e : rep.entries) std::cout << "n=" << e.n << " error=" << e.error << '\n';
  if (rep.fitted_order) std::cout << "fitted order " << *rep.fitted_order << '\n';
  return 0;
}

int cmd_verify(const Options& o) {
  const auto sc = load(o);
  const auto rep = run_verify(sc, sc.seed);
  open_out(o, "verify.json") << verification_to_json(rep).dump(2) << '\n';
  for (const auto& c : rep.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value
              << " tolerance=" << c.tolerance << '\n';
  return rep.pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-model simulator and correlated master-equation builder"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Scenario JSON file")->check(CLI::ExistingFile);
    sub->add_option("--scenario", o.scenario, "Built-in scenario name");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Seed for randomized checks");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* sim = app.add_subcommand("simulate", "Run the collision model and the master equation");
  add_common(sim);
  sim->add_flag("--states", o.states, "Include density matrices in JSON output");
  auto* gen = app.add_subcommand("generators", "Write correlation rates and generators");
  add_common(gen);
  auto* conv = app.add_subcommand("converge", "Collision-model error against the master equation");
  add_common(conv);
  auto* ver = app.add_subcommand("verify", "Expansion identities and generator properties");
  add_common(ver);
  app.add_subcommand("list", "List built-in scenarios")->callback([] {
    for (const auto& n : builtin_names()) std::cout << n << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (gen->parsed()) return cmd_generators(o);
    if (conv->parsed()) return cmd_converge(o);
    if (ver->parsed()) return cmd_verify(o);
    return 0;
  } catch (const PropertyViolation& e) {
    std::cerr << "property check failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
