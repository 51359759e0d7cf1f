#include "ghostsim/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ghostsim/error.hpp"

namespace ghostsim {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string("grid: ") + name + " must be positive and finite, got " +
                          std::to_string(value));
  }
}

}  // namespace

double Grid2D::wavenumber() const noexcept { return 2.0 * std::numbers::pi / wavelength; }

std::int64_t Grid2D::nearest_column(double xpos) const noexcept {
  return static_cast<std::int64_t>(std::llround(xpos / dx)) + static_cast<std::int64_t>(nx / 2);
}

std::int64_t Grid2D::nearest_row(double ypos) const noexcept {
  return static_cast<std::int64_t>(std::llround(ypos / dy)) + static_cast<std::int64_t>(ny / 2);
}

Grid2D make_grid(std::int64_t nx, std::int64_t ny, double dx, double dy, double wavelength) {
  if (nx < 1) throw ValidationError("grid: nx must be >= 1, got " + std::to_string(nx));
  if (ny < 1) throw ValidationError("grid: ny must be >= 1, got " + std::to_string(ny));
  require_positive(dx, "dx");
  require_positive(dy, "dy");
  require_positive(wavelength, "wavelength");
  return Grid2D{static_cast<std::size_t>(nx), static_cast<std::size_t>(ny), dx, dy, wavelength};
}

void validate(const Grid2D& grid) {
  make_grid(static_cast<std::int64_t>(grid.nx), static_cast<std::int64_t>(grid.ny), grid.dx,
            grid.dy, grid.wavelength);
}

}  // namespace ghostsim
