#pragma once

#include <set>
#include <string>
#include <vector>

namespace pupo {

/// Process exit codes.
enum ExitCode : int
{
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Every "section.key" a run config may contain.
std::set<std::string> const &run_config_keys();

/// Entry point of the `pupo` tool. Never throws; returns an ExitCode.
int run_cli(int argc, char const *const *argv);
int run_cli(std::vector<std::string> const &args);

} // namespace pupo
