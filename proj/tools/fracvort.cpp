#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fracvort/errors.hpp"
#include "fracvort/experiment.hpp"

namespace {

struct Command {
  std::string kind;
  CLI::App* app = nullptr;
  std::string config;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_values;
  std::vector<std::pair<std::string, CLI::Option*>> flags;
};

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_' || c == '.') c = '-';
  return "--" + key;
}

std::map<std::string, std::string> parse_sets(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw fracvort::ConfigError("--set expects key=value, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

int execute(const fracvort::Manifest& m) {
  const auto result = fracvort::run(m);
  std::cout << m.kind() << ": " << (result.pass ? "pass" : "FAIL") << "  manifest_hash=" << m.hash_hex()
            << "  summary=" << result.summary_file.string() << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracvort: fractional-noise vorticity experiments"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> commands;
  for (const auto kind_view : fracvort::kExperimentKinds) {
    auto cmd = std::make_unique<Command>();
    cmd->kind = std::string(kind_view);
    cmd->app = app.add_subcommand(cmd->kind, "run the " + cmd->kind + " experiment");
    cmd->app->add_option("-c,--config", cmd->config, "key = value manifest file (flags override it)");
    cmd->app->add_option("--set", cmd->sets, "extra key=value overrides");
    const auto defaults = fracvort::Manifest::defaults(cmd->kind);
    for (const auto& [key, value] : defaults.values()) {
      if (key == "kind") continue;
      auto* opt = cmd->app->add_option(flag_name(key), cmd->flag_values[key], "default: " + value);
      cmd->flags.emplace_back(key, opt);
    }
    commands.push_back(std::move(cmd));
  }

  std::string manifest_file;
  std::vector<std::string> run_sets;
  auto* run_cmd = app.add_subcommand("run", "run the experiment described by a manifest file");
  run_cmd->add_option("manifest", manifest_file, "manifest file with a kind line")->required();
  run_cmd->add_option("--set", run_sets, "key=value overrides");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      auto m = fracvort::Manifest::load(manifest_file);
      m.merge(parse_sets(run_sets));
      return execute(m);
    }
    for (const auto& cmd : commands) {
      if (!cmd->app->parsed()) continue;
      auto m = cmd->config.empty() ? fracvort::Manifest::defaults(cmd->kind)
                                   : fracvort::Manifest::load(cmd->config, cmd->kind);
      std::map<std::string, std::string> overrides;
      for (const auto& [key, opt] : cmd->flags)
        if (opt->count() > 0) overrides[key] = cmd->flag_values[key];
      for (const auto& [k, v] : parse_sets(cmd->sets)) overrides[k] = v;
      m.merge(overrides);
      return execute(m);
    }
  } catch (const fracvort::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
