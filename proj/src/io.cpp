#include "ghostsim/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <system_error>

#include "ghostsim/config.hpp"
#include "ghostsim/error.hpp"

namespace ghostsim {

namespace {

std::uint16_t scale16(double v, double peak) {
  if (!(v > 0.0) || !(peak > 0.0)) return 0;
  const double s = std::round(v / peak * 65535.0);
  return static_cast<std::uint16_t>(std::clamp(s, 0.0, 65535.0));
}

double finite_max(std::span<const double> values) {
  double peak = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) peak = std::max(peak, v);
  }
  return peak;
}

}  // namespace

std::string to_csv(const DataTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw ValidationError("csv " + table.filename + ": row width does not match the header");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += std::isnan(row[c]) ? std::string("nan") : format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

DataTable correlation_table(const CorrelationMap& map, std::string filename) {
  DataTable table{std::move(filename), {"x_m", "g2", "covariance", "stderr"}, {}};
  table.rows.reserve(map.size());
  for (std::size_t k = 0; k < map.size(); ++k) {
    const double x = k < map.positions.size() ? map.positions[k] : static_cast<double>(k);
    table.rows.push_back({x, map.g2[k], map.covariance[k], map.g2_stderr[k]});
  }
  return table;
}

std::string to_pgm_p2(std::span<const double> values, std::size_t width, std::size_t height) {
  if (width * height != values.size() || values.empty()) {
    throw ValidationError("pgm: image shape does not match the data");
  }
  const double peak = finite_max(values);
  std::string out = "P2\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c > 0) out += ' ';
      out += std::to_string(scale16(values[r * width + c], peak));
    }
    out += '\n';
  }
  return out;
}

std::string to_pgm_p5(const IntensityMap& frame) {
  const auto& g = frame.grid;
  if (frame.values.size() != g.size() || frame.values.empty()) {
    throw ValidationError("pgm: frame shape does not match its grid");
  }
  const double peak = finite_max(frame.values);
  std::string out = "P5\n" + std::to_string(g.nx) + " " + std::to_string(g.ny) + "\n65535\n";
  out.reserve(out.size() + 2 * g.size());
  for (double v : frame.values) {
    const std::uint16_t s = scale16(v, peak);
    out += static_cast<char>(s >> 8);
    out += static_cast<char>(s & 0xff);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  if (!std::filesystem::is_directory(dir, ec)) throw IoError(dir.string() + " is not a directory");
}

}  // namespace ghostsim
