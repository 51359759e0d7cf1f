#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ghostsim/field.hpp"
#include "ghostsim/stats.hpp"

namespace ghostsim {

/// A named CSV product: header row plus numeric rows.
struct DataTable {
  std::string filename;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool operator==(const DataTable&) const = default;
};

/// Renders a table as CSV text (shortest round-trip numbers, "nan" for NaN).
std::string to_csv(const DataTable& table);

/// Columns x_m,g2,covariance,stderr; one row per scan position.
DataTable correlation_table(const CorrelationMap& map, std::string filename = "correlation.csv");

/// ASCII P2 image scaled so the data maximum maps to maxval 65535;
/// negative values clip to 0.
std::string to_pgm_p2(std::span<const double> values, std::size_t width, std::size_t height);

/// Binary P5 16-bit big-endian image of an intensity frame, scaled to its maximum.
std::string to_pgm_p5(const IntensityMap& frame);

/// Writes `contents` to `path`; throws IoError naming the path.
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Creates `dir` (and parents); throws IoError on failure.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace ghostsim
