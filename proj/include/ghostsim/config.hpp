#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ghostsim/grid.hpp"
#include "ghostsim/speckle.hpp"

namespace ghostsim {

enum class ObjectKind { none, pinhole, two_hole, hole_array };

ObjectKind parse_object_kind(std::string_view name);
std::string_view to_string(ObjectKind kind);

/// Everything a scenario needs. All lengths in metres, times in seconds.
struct ScenarioConfig {
  // [grid]
  std::int64_t nx = 256;
  std::int64_t ny = 256;
  double dx = 10e-6;
  double dy = 10e-6;
  double wavelength = 532e-9;

  // [source]
  SpeckleSpec source{};

  // [ensemble]
  std::uint64_t realizations = 20000;
  std::uint64_t seed = 20060210;
  std::uint64_t workers = 1;

  // [arms] distance from the beam splitter to the object / reference planes
  double z_object = 0.1;
  double z_reference = 0.1;

  // [lens] imaging system in the reference arm
  bool lens_enabled = false;
  double focal_length = 0.05;
  double lens_aperture = 0.0;  ///< 0 = unlimited
  std::vector<double> magnifications{1.0, 2.0};  ///< |m| values, z1 = f(1 + 1/|m|), z2 = f(1 + |m|)

  // [object]
  ObjectKind object = ObjectKind::none;
  double y1 = -0.5e-3;
  double y2 = 0.5e-3;
  double hole_side = 10e-6;
  double hole_pitch = 240e-6;  ///< lattice pitch of hole_array objects

  // [detector]
  double detector_side = 10e-6;
  double scan_start = -1.2e-3;
  double scan_stop = 1.2e-3;
  double scan_step = 10e-6;
  double scan_y = 0.0;

  // [analysis]
  double guard_fraction = 0.5;
  double background_margin = 3.0;  ///< background needs distance > margin * l_c from the object
  std::vector<double> ratios{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> z_over_rayleigh{0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> side_multiples{1.0, 2.0, 4.0, 8.0};
  std::uint64_t metric_frames = 200;

  // [output]
  std::string output_dir = "out";
  std::uint64_t dump_frames = 0;

  Grid2D grid() const;
  EnsembleSpec ensemble() const { return {realizations, seed}; }
  std::vector<double> scan_positions() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses the documented key = value grammar on top of `defaults`.
/// Dimensioned keys need a unit suffix (m, cm, mm, um, nm; s, ms, us, ns).
/// Unknown sections or keys, syntax errors and bad units throw ConfigError
/// with the line number.
ScenarioConfig parse_config_text(std::string_view text, const ScenarioConfig& defaults = {});
ScenarioConfig parse_config(const std::filesystem::path& path, const ScenarioConfig& defaults = {});

/// Writes every key; parse_config_text(write_config(c)) == c. Without
/// `run_settings` the worker count and output directory are left out, so the
/// text depends only on what determines the results.
std::string write_config(const ScenarioConfig& config, bool run_settings = true);

/// "80um" -> 8e-5. Throws ConfigError on a missing or unknown unit.
double parse_length(std::string_view text);
double parse_duration(std::string_view text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace ghostsim
