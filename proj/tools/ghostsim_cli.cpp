// ghostsim: run a ghost-imaging scenario and write its verdict and data products.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/runner.hpp"
#include "ghostsim/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ghost imaging with pseudo-thermal light"};
  app.set_version_flag("--version", std::string(ghostsim::version()));

  std::string scenario;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0, realizations = 0, workers = 0;
  bool list = false;

  std::string names;
  for (const auto& n : ghostsim::scenario_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("--scenario", scenario, "Scenario to run: " + names);
  app.add_option("--config", config_path, "Config file (key = value with unit suffixes)");
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed override");
  auto* real_opt = app.add_option("--realizations", realizations, "Ensemble size override");
  auto* work_opt = app.add_option("--workers", workers, "Worker threads (0 = all cores)");
  app.add_flag("--list", list, "List registered scenarios and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (list) {
    for (const auto& n : ghostsim::scenario_names()) std::cout << n << "\n";
    return 0;
  }
  if (scenario.empty()) {
    std::cerr << "error: --scenario is required (registered: " << names << ")\n";
    return 2;
  }

  ghostsim::RunRequest request;
  request.scenario = scenario;
  if (!config_path.empty()) request.config_path = config_path;
  if (!out_dir.empty()) request.output_dir = out_dir;
  if (*seed_opt) request.seed = seed;
  if (*real_opt) request.realizations = realizations;
  if (*work_opt) request.workers = workers;

  try {
    const auto summary = ghostsim::run(request);
    std::cout << "ghostsim " << summary.tool_version << "\n\n"
              << summary.verdict.table() << "\nruntime: " << summary.runtime_seconds << " s\n"
              << "output: " << summary.config.output_dir << "\n";
    for (const auto& f : summary.manifest) std::cout << "  " << f << "\n";
    return summary.exit_code();
  } catch (const ghostsim::InsufficientDataError& e) {
    std::cerr << "error: insufficient data: " << e.what() << "\n";
  } catch (const ghostsim::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
  } catch (const ghostsim::IoError& e) {
    std::cerr << "error: i/o: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
