#pragma once

#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "ghostsim/field.hpp"

namespace ghostsim {

enum class EvanescentPolicy { truncate };

struct PropagationSpec {
  double z = 0.0;  ///< metres, >= 0
  EvanescentPolicy evanescent = EvanescentPolicy::truncate;

  bool operator==(const PropagationSpec&) const = default;
};

struct LensSpec {
  double focal_length = 0.0;                ///< metres, nonzero
  std::optional<double> aperture_diameter;  ///< circular pupil, metres

  bool operator==(const LensSpec&) const = default;
};

void validate(const LensSpec& lens);

/// Complex transmission of the object plane, |t| <= 1.
class ApertureMask {
 public:
  ApertureMask() = default;
  ApertureMask(const Grid2D& grid, std::vector<Complex> transmission);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<const Complex> transmission() const noexcept { return transmission_; }
  /// Sum |t|^2 dx dy.
  double open_area() const noexcept { return open_area_; }
  /// Physical (x, y) of every sample with nonzero transmission.
  std::vector<std::pair<double, double>> open_points() const;

  bool operator==(const ApertureMask&) const = default;

 private:
  Grid2D grid_{};
  std::vector<Complex> transmission_;
  double open_area_ = 0.0;
};

ApertureMask make_uniform_mask(const Grid2D& grid, Complex value);

/// Axis-aligned rectangle centred at (x, y).
struct RectHole {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
};

/// Binary mask open on each rectangle. A pixel is open when its centre lies
/// in [x - w/2, x + w/2) x [y - h/2, y + h/2). Throws on empty,
/// out-of-bounds or overlapping holes.
ApertureMask make_rect_mask(const Grid2D& grid, std::span<const RectHole> holes);

/// Two s x s holes centred at (y1, 0) and (y2, 0) on the scan axis.
ApertureMask make_two_hole_mask(const Grid2D& grid, double y1, double y2, double side);

/// exp(i z kz) on the propagating band, zero for evanescent bins. DFT bin order.
std::vector<Complex> transfer_function(const Grid2D& grid, double z);

/// exp(-i k r^2 / 2f), clipped by the aperture if any. Row-major.
std::vector<Complex> lens_phase(const Grid2D& grid, const LensSpec& lens);

/// Angular-spectrum propagation. z = 0 returns the input unchanged.
ComplexField propagate(const ComplexField& field, const PropagationSpec& spec);

/// Ideal beam splitter; both outputs are identical.
std::pair<ComplexField, ComplexField> beam_splitter(const ComplexField& field,
                                                    bool halve_power = false);

ComplexField apply_mask(const ComplexField& field, const ApertureMask& mask);

ComplexField thin_lens(const ComplexField& field, const LensSpec& lens);

/// Image distance satisfying 1/z1 + 1/z2 = 1/f.
double image_distance(double z1, double focal_length);

/// Throws ValidationError naming the required z2 if the imaging condition is
/// off by more than 0.1%.
void check_imaging_condition(double z1, double focal_length, double z2);

/// propagate(z1), thin lens, propagate(z2); magnification -z2/z1.
ComplexField image_system(const ComplexField& field, double z1, const LensSpec& lens, double z2);

using OpticalStep = std::variant<PropagationSpec, LensSpec>;

/// Ordered operations applied to one arm after the beam splitter.
struct OpticalChain {
  std::vector<OpticalStep> steps;

  static OpticalChain free_space(double z);
  /// Free space z_before, then an imaging system (z1, lens, z2).
  static OpticalChain imaging(double z_before, double z1, const LensSpec& lens, double z2);

  /// Total free-space distance before the first lens.
  double distance_to_first_lens() const;

  bool operator==(const OpticalChain&) const = default;
};

void validate(const OpticalChain& chain);

ComplexField apply_chain(const ComplexField& field, const OpticalChain& chain);

}  // namespace ghostsim
