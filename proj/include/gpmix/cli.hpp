#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace gpmix {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "GPMIX_OUTPUT_DIR";

struct CliInvocation {
  std::string subcommand;  ///< exact, gibbs, prior, bounds, fig3, capture, certify, sweep
  std::string config_path;  ///< empty: no config file
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<double> theta;  ///< fig3 only
  int verbosity = 0;
};

/// Runs one subcommand. Flags override config fields. Returns 0 on success;
/// throws DomainError or Refusal, which run_cli maps to exit codes 1 and 2.
int run(const CliInvocation& invocation);

/// Parses argv, runs, and maps errors to exit codes with a message on stderr.
int run_cli(int argc, char** argv);

}  // namespace gpmix
