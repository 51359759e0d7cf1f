#pragma once

#include <cstddef>
#include <cstdint>

namespace ghostsim {

/// Uniform sampling grid shared by every field, mask and detector.
///
/// Sample (i, j) sits at ((i - nx/2) dx, (j - ny/2) dy) with integer division,
/// so the sample at index (nx/2, ny/2) is the optical axis. Storage is
/// row-major: index = j * nx + i.
struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 0.0;
  double dy = 0.0;
  double wavelength = 0.0;

  std::size_t size() const noexcept { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx + i; }

  double x(std::size_t i) const noexcept {
    return (static_cast<double>(i) - static_cast<double>(nx / 2)) * dx;
  }
  double y(std::size_t j) const noexcept {
    return (static_cast<double>(j) - static_cast<double>(ny / 2)) * dy;
  }

  double extent_x() const noexcept { return static_cast<double>(nx) * dx; }
  double extent_y() const noexcept { return static_cast<double>(ny) * dy; }
  double pixel_area() const noexcept { return dx * dy; }
  double wavenumber() const noexcept;

  /// Nearest column / row to a physical coordinate, unclamped.
  std::int64_t nearest_column(double xpos) const noexcept;
  std::int64_t nearest_row(double ypos) const noexcept;

  bool operator==(const Grid2D&) const = default;
};

/// Validates and builds a grid. Throws ValidationError naming the bad field.
Grid2D make_grid(std::int64_t nx, std::int64_t ny, double dx, double dy, double wavelength);

/// Re-checks the invariants of an existing grid.
void validate(const Grid2D& grid);

}  // namespace ghostsim
