#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"

namespace stosym::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kThresholdFailure = 4 };

struct CommandOptions {
  std::string config_path;
  bool plot = false;
  bool paper_scale = false;
  bool no_truncate = false;
  int threads = 1;
  std::optional<std::string> seed;
  std::optional<std::string> output_dir;
};

struct ResolvedSeed {
  std::uint64_t value = 0;
  std::string source;  // flag | env | config
};

/// Seed precedence: command-line flag, then STOSYM_SEED, then the config.
ResolvedSeed resolve_seed(const std::optional<std::string>& flag, const char* env, std::uint64_t config_seed);

/// Config after applying command-line overrides and the seed precedence.
RunConfig effective_config(RunConfig cfg, const CommandOptions& opts, const char* env_seed, ResolvedSeed& seed);

int cmd_simulate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_converge(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_conserve(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_symplectic_check(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace stosym::cli
