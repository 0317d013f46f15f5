#pragma once

#include "comoga/io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace comoga::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitResourceCap = 3,
};

struct Invocation {
  std::string command;
  std::optional<std::filesystem::path> config_path;
  /// Raw flag text per config key; parsed as JSON when possible, else taken as a string.
  std::map<std::string, std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "comoga_out";
  bool timing = false;
};

std::vector<std::string> command_names();
std::string command_description(const std::string& command);

/// Every config key of a command with its default value.
const io::Json& command_defaults(const std::string& command);

/// Defaults, then the config file, then flags. Unknown keys are rejected.
io::Json resolve_config(const Invocation& invocation);

/// Runs one command and maps failures onto the exit-code contract.
int run(const Invocation& invocation, std::ostream& out, std::ostream& err);

}  // namespace comoga::cli
