#pragma once

// Command-line front end: single episodes and seed batches.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "landsite/simloop.hpp"

namespace landsite {

enum ExitCode : int {
  kExitLanded = 0,
  kExitAborted = 2,
  kExitTimeout = 3,
  kExitConfigError = 4,
  kExitIoError = 5,
};

struct Emit {
  bool maps = false;
  bool telemetry = true;
  bool summary = true;
};

struct RunConfig {
  std::filesystem::path scenario;
  std::vector<std::string> overrides;  // "symbol=value"
  std::uint64_t seed_first = 1;
  std::uint64_t seed_last = 1;
  std::filesystem::path out_dir;       // empty: print only
  Emit emit;
  int workers = 1;
  int map_stride = 10;
};

/// "a..b" (inclusive) or a single "a". Throws ConfigError.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);
/// Comma-separated subset of maps, telemetry, summary. Throws ConfigError.
Emit parse_emit(const std::string& text);

int exit_code(Outcome outcome);

/// Runs every seed and writes outputs. Returns the process exit code: the
/// outcome of a single episode, or for a batch 0 when every seed landed,
/// else aborted before timeout.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace landsite
