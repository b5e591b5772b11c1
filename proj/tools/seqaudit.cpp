#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqaudit/cli/commands.hpp"
#include "seqaudit/cli/reproduce.hpp"

namespace {

using namespace seqaudit;
using namespace seqaudit::cli;

struct Globals {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> overrides;
};

void apply_override(Config& c, const std::string& spec) {
  const auto eq = spec.find('=');
  const auto dot = spec.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq)
    throw ConfigError("--set expects section.key=value, got '" + spec + "'");
  c.set(spec.substr(0, dot), spec.substr(dot + 1, eq - dot - 1), spec.substr(eq + 1));
}

void apply_globals(Config& c, const Globals& g) {
  for (const auto& s : g.overrides) apply_override(c, s);
  if (g.seed) c.set("experiment", "seed", std::to_string(*g.seed));
  if (g.threads) c.set("experiment", "threads", std::to_string(*g.threads));
}

const std::map<std::string, CommandFn>& commands() {
  static const std::map<std::string, CommandFn> table{
      {"simulate", cmd_simulate}, {"test", cmd_test},         {"mi-scan", cmd_mi_scan},
      {"overshoot", cmd_overshoot}, {"analytic", cmd_analytic}, {"oracle", cmd_oracle},
      {"reproduce", cmd_reproduce}};
  return table;
}

int run_with(const std::string& name, const std::function<Config()>& build, const Globals& g) {
  Config cfg;
  try {
    cfg = build();
    apply_globals(cfg, g);
  } catch (...) {
    return exit_code_for(std::current_exception(), std::cerr);
  }
  return execute(name, commands().at(name), cfg, g.out_dir, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box audit of sequential two-hypothesis decision devices"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--out-dir", g.out_dir, "Directory for outputs and the run manifest");
  app.add_option("--seed", g.seed, "Override experiment.seed");
  app.add_option("--threads", g.threads, "Override experiment.threads")->check(CLI::PositiveNumber);
  app.add_option("--set", g.overrides, "Override a config value: section.key=value")
      ->take_all()
      ->allow_extra_args(false);

  std::string config_path;
  std::vector<std::pair<std::string, CLI::App*>> config_cmds;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"simulate", "Simulate a device and write trial records"},
           {"test", "Optimality tests on a record CSV"},
           {"mi-scan", "Information and mean-time scan over a belief parameter"},
           {"overshoot", "Conditional overshoot profile and flatness"},
           {"analytic", "Tabulate continuous-time closed forms"},
           {"oracle", "Exact law of the lattice model"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    config_cmds.emplace_back(name, sub);
  }
  std::string records, mode;
  for (auto& [name, sub] : config_cmds)
    if (name == "test") {
      sub->add_option("--records", records, "Record CSV (overrides test.records)");
      sub->add_option("--mode", mode, "known-h or unknown-h (overrides test.mode)")
          ->check(CLI::IsMember({"known-h", "unknown-h"}));
    }

  auto* reproduce = app.add_subcommand("reproduce", "Reproduce a figure family at desk scale");
  std::string figure;
  std::optional<double> scale;
  std::string valid;
  for (const auto& [k, v] : figures()) valid += (valid.empty() ? "" : ", ") + k;
  reproduce->add_option("figure", figure, "Figure id: " + valid)->required();
  reproduce->add_option("--scale", scale, "Fraction of the full trial counts")
      ->check(CLI::PositiveNumber);

  auto* rerun = app.add_subcommand("rerun", "Replay a run from its manifest");
  std::string manifest_path;
  rerun->add_option("manifest", manifest_path, "Manifest file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  for (auto& [name, sub] : config_cmds)
    if (sub->parsed())
      return run_with(
          name,
          [&, n = name] {
            Config c = Config::load(config_path);
            if (n == "test") {
              if (!records.empty()) c.set("test", "records", records);
              if (!mode.empty()) c.set("test", "mode", mode);
            }
            return c;
          },
          g);

  if (reproduce->parsed())
    return run_with(
        "reproduce",
        [&] {
          Config c;
          c.set("reproduce", "figure", figure);
          if (scale) c.set("reproduce", "scale", format_double(*scale));
          return c;
        },
        g);

  // rerun: the manifest is itself a config naming its command.
  Config c;
  std::string name;
  try {
    c = Config::load(manifest_path);
    name = c.require("manifest", "command");
    if (!commands().count(name)) throw ConfigError(manifest_path + ": unknown command '" + name + "'");
    apply_globals(c, g);
  } catch (...) {
    return exit_code_for(std::current_exception(), std::cerr);
  }
  return execute(name, commands().at(name), c, g.out_dir, std::cout, std::cerr);
}
