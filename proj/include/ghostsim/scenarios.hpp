#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ghostsim/config.hpp"
#include "ghostsim/field.hpp"
#include "ghostsim/io.hpp"
#include "ghostsim/stats.hpp"

namespace ghostsim {

/// One pass/fail comparison. `passed` is lower <= measured <= upper.
struct Check {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool passed = false;
};

Check make_check(std::string name, double measured, double expected, double lower, double upper);

struct ScenarioVerdict {
  std::string scenario;
  std::string mode;  ///< e.g. "matched", "mismatch"
  std::vector<Check> checks;
  double runtime_seconds = 0.0;
  std::uint64_t seed = 0;

  bool passed() const noexcept;
  /// Plain-text table; runtime is deliberately not part of it.
  std::string table() const;
};

struct ScenarioResult {
  ScenarioVerdict verdict;
  ScenarioConfig config;
  std::vector<DataTable> tables;
  std::optional<CorrelationMap> correlation;
  std::vector<double> ghost_image;     ///< covariance along the scan, for the PGM
  std::vector<IntensityMap> frames;    ///< reference-plane intensity dumps
};

/// Scenario defaults layered on the generic ScenarioConfig defaults.
ScenarioConfig default_config(std::string_view scenario);

ScenarioResult run_equal_plane(const ScenarioConfig& config);
ScenarioResult run_two_hole_ghost(const ScenarioConfig& config);
ScenarioResult run_contrast_sweep(const ScenarioConfig& config, const std::vector<double>& ratios);
ScenarioResult run_contrast_sweep(const ScenarioConfig& config);
ScenarioResult run_lens_ghost(const ScenarioConfig& config);
ScenarioResult run_near_to_far(const ScenarioConfig& config, const std::vector<double>& z_list);
ScenarioResult run_near_to_far(const ScenarioConfig& config);
/// `sides` are detector sides in metres.
ScenarioResult run_resolution_tradeoff(const ScenarioConfig& config, const std::vector<double>& sides);
ScenarioResult run_resolution_tradeoff(const ScenarioConfig& config);

const std::vector<std::string>& scenario_names();

/// Dispatches by name; unknown names throw ValidationError listing the registry.
ScenarioResult run_scenario(std::string_view name, const ScenarioConfig& config);

/// Local maxima of `values` at or above `fraction` of the global maximum,
/// refined by a parabola through the three samples around each. Returns
/// refined coordinates along `positions` (uniformly spaced).
std::vector<double> find_peaks(const std::vector<double>& values, const std::vector<double>& positions,
                               double fraction = 0.5);

}  // namespace ghostsim
