#pragma once

#include <span>
#include <vector>

#include "ghostsim/fft.hpp"
#include "ghostsim/grid.hpp"

namespace ghostsim {

/// Sampled complex scalar amplitude on a Grid2D, row-major.
class ComplexField {
 public:
  ComplexField() = default;
  /// Zero field on `grid`.
  explicit ComplexField(const Grid2D& grid);
  /// Takes ownership of `samples`; throws ValidationError on size mismatch or
  /// non-finite samples.
  ComplexField(const Grid2D& grid, ComplexBuffer samples);

  static ComplexField constant(const Grid2D& grid, Complex value);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<const Complex> samples() const noexcept { return samples_; }
  std::span<Complex> samples() noexcept { return samples_; }
  const ComplexBuffer& buffer() const noexcept { return samples_; }
  ComplexBuffer& buffer() noexcept { return samples_; }

  const Complex& operator()(std::size_t i, std::size_t j) const { return samples_[grid_.index(i, j)]; }
  Complex& operator()(std::size_t i, std::size_t j) { return samples_[grid_.index(i, j)]; }

  /// Sum |E|^2 dx dy.
  double total_power() const noexcept;

  bool operator==(const ComplexField& other) const = default;

 private:
  Grid2D grid_{};
  ComplexBuffer samples_;
};

/// Throws ValidationError if any sample is not finite.
void validate(const ComplexField& field);

/// Largest |a - b| over samples; grids must match.
double max_abs_difference(const ComplexField& a, const ComplexField& b);

/// Real-valued map on a grid (intensities, autocorrelations, ...).
struct IntensityMap {
  Grid2D grid{};
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
  double mean() const noexcept;
};

/// |E|^2 at every sample.
IntensityMap intensity(const ComplexField& field);

/// Full width of a sampled profile where it first falls below `level` times
/// its value at `center`, searching both directions. Crossings are located by
/// interpolating ln(profile) linearly in distance squared (exact for
/// Gaussians centred on `center`). Returns the width in units of `spacing`,
/// or NaN when no crossing exists.
double full_width_at_level(std::span<const double> profile, std::size_t center, double level,
                           double spacing);

}  // namespace ghostsim
