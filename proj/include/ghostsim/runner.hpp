#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ghostsim/config.hpp"
#include "ghostsim/scenarios.hpp"

namespace ghostsim {

std::string_view version() noexcept;

struct RunRequest {
  std::string scenario;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> realizations;
  std::optional<std::uint64_t> workers;
};

struct RunSummary {
  ScenarioConfig config;
  std::string config_echo;  ///< write_config(config)
  ScenarioVerdict verdict;
  std::vector<std::string> manifest;  ///< files written, relative to the output directory
  double runtime_seconds = 0.0;
  std::string tool_version;

  int exit_code() const noexcept { return verdict.passed() ? 0 : 1; }
};

/// Scenario defaults, then the config file, then the overrides.
ScenarioConfig resolve_config(const RunRequest& request);

/// Writes every product of `result` into `dir`; returns the manifest.
std::vector<std::string> write_outputs(const ScenarioResult& result, const std::filesystem::path& dir);

/// Resolves the config, runs the scenario and writes the outputs.
/// Errors propagate as exceptions; the CLI maps them to exit code 2.
RunSummary run(const RunRequest& request);

}  // namespace ghostsim
