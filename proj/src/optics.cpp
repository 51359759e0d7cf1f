#include "ghostsim/optics.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "ghostsim/error.hpp"

namespace ghostsim {

namespace {

void warn_if_coarse(const Grid2D& grid) {
  static std::once_flag once;
  if (grid.dx > grid.wavelength / 2 || grid.dy > grid.wavelength / 2) {
    std::call_once(once, [] {
      warn("grid pitch exceeds lambda/2; only paraxial (band-limited) fields propagate accurately");
    });
  }
}

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw ValidationError(std::string(what) + ": grid mismatch");
}

}  // namespace

void validate(const LensSpec& lens) {
  if (lens.focal_length == 0.0 || !std::isfinite(lens.focal_length)) {
    throw ValidationError("lens: focal_length must be nonzero and finite");
  }
  if (lens.aperture_diameter && !(*lens.aperture_diameter > 0.0)) {
    throw ValidationError("lens: aperture_diameter must be positive");
  }
}

ApertureMask::ApertureMask(const Grid2D& grid, std::vector<Complex> transmission)
    : grid_(grid), transmission_(std::move(transmission)) {
  validate(grid_);
  if (transmission_.size() != grid_.size()) {
    throw ValidationError("mask: transmission size does not match grid");
  }
  double sum = 0.0;
  for (const auto& t : transmission_) {
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) {
      throw ValidationError("mask: non-finite transmission");
    }
    if (std::abs(t) > 1.0 + 1e-12) throw ValidationError("mask: |t| exceeds 1");
    sum += std::norm(t);
  }
  open_area_ = sum * grid_.pixel_area();
}

std::vector<std::pair<double, double>> ApertureMask::open_points() const {
  std::vector<std::pair<double, double>> points;
  for (std::size_t j = 0; j < grid_.ny; ++j) {
    for (std::size_t i = 0; i < grid_.nx; ++i) {
      if (transmission_[grid_.index(i, j)] != Complex{}) points.emplace_back(grid_.x(i), grid_.y(j));
    }
  }
  return points;
}

ApertureMask make_uniform_mask(const Grid2D& grid, Complex value) {
  return ApertureMask(grid, std::vector<Complex>(grid.size(), value));
}

namespace {

// Half-open pixel range whose centres fall in [lo, hi) (physical metres).
std::pair<long long, long long> pixel_span(double lo, double hi, double pitch, std::size_t n) {
  const double offset = static_cast<double>(n / 2);
  constexpr double eps = 1e-9;
  const auto first = static_cast<long long>(std::ceil(lo / pitch + offset - eps));
  const auto last = static_cast<long long>(std::ceil(hi / pitch + offset - eps));
  return {first, last};
}

}  // namespace

ApertureMask make_rect_mask(const Grid2D& grid, std::span<const RectHole> holes) {
  validate(grid);
  std::vector<Complex> t(grid.size(), Complex{});
  for (std::size_t h = 0; h < holes.size(); ++h) {
    const auto& hole = holes[h];
    const std::string tag = "mask: hole " + std::to_string(h);
    if (!(hole.width > 0.0) || !(hole.height > 0.0)) throw ValidationError(tag + " is empty");
    const auto [i0, i1] = pixel_span(hole.x - hole.width / 2, hole.x + hole.width / 2, grid.dx, grid.nx);
    const auto [j0, j1] = pixel_span(hole.y - hole.height / 2, hole.y + hole.height / 2, grid.dy, grid.ny);
    if (i1 <= i0 || j1 <= j0) throw ValidationError(tag + " covers no pixel centre");
    if (i0 < 0 || j0 < 0 || i1 > static_cast<long long>(grid.nx) ||
        j1 > static_cast<long long>(grid.ny)) {
      throw ValidationError(tag + " lies outside the grid");
    }
    for (long long j = j0; j < j1; ++j) {
      for (long long i = i0; i < i1; ++i) {
        auto& cell = t[grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
        if (cell != Complex{}) throw ValidationError(tag + " overlaps another hole");
        cell = 1.0;
      }
    }
  }
  return ApertureMask(grid, std::move(t));
}

ApertureMask make_two_hole_mask(const Grid2D& grid, double y1, double y2, double side) {
  if (!(side > 0.0)) throw ValidationError("two-hole mask: hole side must be positive");
  const RectHole holes[] = {{y1, 0.0, side, side}, {y2, 0.0, side, side}};
  return make_rect_mask(grid, holes);
}

std::vector<Complex> transfer_function(const Grid2D& grid, double z) {
  const double k = grid.wavenumber();
  const double k2 = k * k;
  const double dkx = 2.0 * std::numbers::pi / grid.extent_x();
  const double dky = 2.0 * std::numbers::pi / grid.extent_y();
  std::vector<Complex> t(grid.size());
  for (std::size_t j = 0; j < grid.ny; ++j) {
    const double ky = dky * static_cast<double>(frequency_index(j, grid.ny));
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double kx = dkx * static_cast<double>(frequency_index(i, grid.nx));
      const double kt2 = kx * kx + ky * ky;
      const double kz2 = k2 - kt2;
      if (kz2 <= 0.0) {
        t[grid.index(i, j)] = Complex{};
        continue;
      }
      const double kz = std::sqrt(kz2);
      t[grid.index(i, j)] = std::polar(1.0, z * kz);
    }
  }
  return t;
}

std::vector<Complex> lens_phase(const Grid2D& grid, const LensSpec& lens) {
  validate(lens);
  const double k = grid.wavenumber();
  const double r_max2 =
      lens.aperture_diameter ? 0.25 * *lens.aperture_diameter * *lens.aperture_diameter : INFINITY;
  std::vector<Complex> phase(grid.size());
  for (std::size_t j = 0; j < grid.ny; ++j) {
    const double y = grid.y(j);
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i);
      const double r2 = x * x + y * y;
      phase[grid.index(i, j)] =
          r2 > r_max2 ? Complex{} : std::polar(1.0, -k * r2 / (2.0 * lens.focal_length));
    }
  }
  return phase;
}

ComplexField propagate(const ComplexField& field, const PropagationSpec& spec) {
  if (!(spec.z >= 0.0) || !std::isfinite(spec.z)) {
    throw ValidationError("propagation: z must be >= 0, got " + std::to_string(spec.z));
  }
  if (spec.z == 0.0) return field;
  const Grid2D& grid = field.grid();
  warn_if_coarse(grid);
  const auto transfer = transfer_function(grid, spec.z);
  ComplexBuffer data = field.buffer();
  const auto& fft = Fft2D::get(grid.nx, grid.ny);
  fft.forward(data);
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = (data[k] * inv_n) * transfer[k];
  fft.backward(data);
  return ComplexField(grid, std::move(data));
}

std::pair<ComplexField, ComplexField> beam_splitter(const ComplexField& field, bool halve_power) {
  if (!halve_power) return {field, field};
  ComplexField scaled = field;
  for (auto& e : scaled.samples()) e *= 0.5 * std::numbers::sqrt2;
  return {scaled, scaled};
}

ComplexField apply_mask(const ComplexField& field, const ApertureMask& mask) {
  require_same_grid(field.grid(), mask.grid(), "apply_mask");
  ComplexField out = field;
  const auto t = mask.transmission();
  auto s = out.samples();
  for (std::size_t k = 0; k < s.size(); ++k) s[k] *= t[k];
  return out;
}

ComplexField thin_lens(const ComplexField& field, const LensSpec& lens) {
  const auto phase = lens_phase(field.grid(), lens);
  ComplexField out = field;
  auto s = out.samples();
  for (std::size_t k = 0; k < s.size(); ++k) s[k] *= phase[k];
  return out;
}

double image_distance(double z1, double focal_length) {
  return 1.0 / (1.0 / focal_length - 1.0 / z1);
}

void check_imaging_condition(double z1, double focal_length, double z2) {
  if (!(z1 > 0.0) || !(z2 > 0.0)) throw ValidationError("imaging: z1 and z2 must be positive");
  if (focal_length == 0.0) throw ValidationError("lens: focal_length must be nonzero");
  const double mismatch = std::abs((1.0 / z1 + 1.0 / z2) * focal_length - 1.0);
  if (mismatch > 1e-3) {
    throw ValidationError("imaging: 1/z1 + 1/z2 != 1/f; z2 must be " +
                          std::to_string(image_distance(z1, focal_length)) + " m for z1 = " +
                          std::to_string(z1) + " m");
  }
}

ComplexField image_system(const ComplexField& field, double z1, const LensSpec& lens, double z2) {
  validate(lens);
  check_imaging_condition(z1, lens.focal_length, z2);
  return propagate(thin_lens(propagate(field, {z1}), lens), {z2});
}

OpticalChain OpticalChain::free_space(double z) {
  OpticalChain chain;
  if (z != 0.0) chain.steps.emplace_back(PropagationSpec{z});
  validate(chain);
  return chain;
}

OpticalChain OpticalChain::imaging(double z_before, double z1, const LensSpec& lens, double z2) {
  validate(lens);
  check_imaging_condition(z1, lens.focal_length, z2);
  OpticalChain chain;
  // Merge the leading free-space sections into one propagation.
  chain.steps.emplace_back(PropagationSpec{z_before + z1});
  chain.steps.emplace_back(lens);
  chain.steps.emplace_back(PropagationSpec{z2});
  validate(chain);
  return chain;
}

double OpticalChain::distance_to_first_lens() const {
  double z = 0.0;
  for (const auto& step : steps) {
    if (std::holds_alternative<LensSpec>(step)) break;
    z += std::get<PropagationSpec>(step).z;
  }
  return z;
}

void validate(const OpticalChain& chain) {
  for (const auto& step : chain.steps) {
    if (const auto* p = std::get_if<PropagationSpec>(&step)) {
      if (!(p->z >= 0.0) || !std::isfinite(p->z)) throw ValidationError("chain: negative propagation distance");
    } else {
      validate(std::get<LensSpec>(step));
    }
  }
}

ComplexField apply_chain(const ComplexField& field, const OpticalChain& chain) {
  ComplexField out = field;
  for (const auto& step : chain.steps) {
    if (const auto* p = std::get_if<PropagationSpec>(&step)) {
      out = propagate(out, *p);
    } else {
      out = thin_lens(out, std::get<LensSpec>(step));
    }
  }
  return out;
}

}  // namespace ghostsim
