#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lexpath/error.hpp"

namespace lexpath::cli {

/// Process exit status. These values are a stable contract for supervising
/// processes; see the table in README.md.
enum class ExitCode : int {
  Ok = 0,
  Failure = 1,
  Unreadable = 2,
  FixtureMiss = 3,
  EndpointUnavailable = 4,
  ChainBroken = 5,
  Reject = 10,
  Undetermined = 11,
};

ExitCode exit_code_for(ErrorCode code) noexcept;
std::string_view describe(ExitCode code) noexcept;

enum class OutputFormat { Human, Json };

struct Config {
  std::string pack_store_path = "packs";
  std::string fixture_store_path = "fixtures";
  std::string default_policy = "argmax";
  OutputFormat output_format = OutputFormat::Human;
  int verbosity = 0;
};

/// Reads a config file (same keys as Config). Throws Error(Io) when the file
/// cannot be read and Error(InvalidArgument) when a value is bad.
Config load_config(const std::string& file);

/// Runs one command line (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexpath::cli
