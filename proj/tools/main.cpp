#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace {

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace comoga::cli;

  CLI::App app{"Constrained multi-objective gradient aggregation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "comoga_out";
  bool timing = false;
  std::map<std::string, std::map<std::string, std::string>> values;
  std::vector<std::string> archive_files;

  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, command_description(name));
    sub->add_option("--config", config_path, "JSON config file; flags override its keys");
    sub->add_option("--seed", seed, "Seed for every random draw");
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--timing", timing, "Add wall-clock seconds to reports");
    for (const auto& [key, value] : command_defaults(name).items()) {
      if (key == "seed" || (name == "metrics" && key == "archives")) continue;
      sub->add_option(flag_name(key), values[name][key], "Overrides '" + key + "' (default " + value.dump() + ")");
    }
    if (name == "metrics") sub->add_option("archives", archive_files, "Archive JSON files")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  Invocation inv;
  for (CLI::App* sub : app.get_subcommands()) {
    inv.command = sub->get_name();
    if (sub->count("--config")) inv.config_path = config_path;
    if (sub->count("--seed")) inv.seed = seed;
    inv.out_dir = out_dir;
    inv.timing = timing;
    for (const auto& [key, text] : values[inv.command]) {
      if (sub->count(flag_name(key))) inv.overrides[key] = text;
    }
    if (inv.command == "metrics") {
      nlohmann::json files = archive_files;
      inv.overrides["archives"] = files.dump();
    }
  }
  return run(inv, std::cout, std::cerr);
}
