#include "ghostsim/runner.hpp"

#include <chrono>
#include <cstdio>

#include "ghostsim/error.hpp"
#include "ghostsim/io.hpp"

#ifndef GHOSTSIM_VERSION
#define GHOSTSIM_VERSION "0.0.0"
#endif

namespace ghostsim {

std::string_view version() noexcept { return GHOSTSIM_VERSION; }

ScenarioConfig resolve_config(const RunRequest& request) {
  ScenarioConfig config = default_config(request.scenario);
  if (request.config_path) config = parse_config(*request.config_path, config);
  if (request.output_dir) config.output_dir = request.output_dir->string();
  if (request.seed) config.seed = *request.seed;
  if (request.realizations) config.realizations = *request.realizations;
  if (request.workers) config.workers = *request.workers;
  return config;
}

std::vector<std::string> write_outputs(const ScenarioResult& result, const std::filesystem::path& dir) {
  ensure_directory(dir);
  std::vector<std::string> manifest;
  auto put = [&](const std::string& name, const std::string& contents) {
    write_file(dir / name, contents);
    manifest.push_back(name);
  };
  put("summary.txt", result.verdict.table());
  put("resolved_config.cfg", write_config(result.config, false));
  for (const auto& table : result.tables) put(table.filename, to_csv(table));
  if (!result.ghost_image.empty()) {
    put("ghost_image.pgm", to_pgm_p2(result.ghost_image, result.ghost_image.size(), 1));
  }
  for (std::size_t k = 0; k < result.frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.pgm", k);
    put(name, to_pgm_p5(result.frames[k]));
  }
  return manifest;
}

RunSummary run(const RunRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.tool_version = std::string(version());
  summary.config = resolve_config(request);
  summary.config_echo = write_config(summary.config);
  const std::filesystem::path dir = summary.config.output_dir;
  if (dir.empty()) throw ValidationError("output.dir: empty output directory");
  ensure_directory(dir);
  const auto result = run_scenario(request.scenario, summary.config);
  summary.verdict = result.verdict;
  summary.manifest = write_outputs(result, dir);
  summary.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace ghostsim
