#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "difflab/harness.hpp"

namespace difflab::cli {

struct CliConfig {
  harness::ExperimentConfig experiment;
  /// Primary CSV path; empty means standard output.
  std::string output;
  std::size_t threads = 1;
};

/// Command-line values that take precedence over the JSON file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> iterations;
  std::optional<std::string> output;
  std::optional<std::size_t> threads;
  /// Comma-separated strategy names.
  std::optional<std::string> strategies;
};

/// Parses a JSON config. Unknown keys, wrong types and out-of-range values
/// raise harness::ConfigError.
CliConfig parse_config(const std::string& json_text);

/// Reads and parses a config file; a missing file raises ConfigError naming it.
CliConfig load_config(const std::filesystem::path& path);

/// Applies flag overrides, then DIFFLAB_THREADS (`env_threads`) when no
/// --threads flag was given, then re-validates.
void apply_overrides(CliConfig& config, const Overrides& overrides, const char* env_threads);

}  // namespace difflab::cli
