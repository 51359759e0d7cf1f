#include "ghostsim/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ghostsim/error.hpp"

namespace ghostsim {

ComplexField::ComplexField(const Grid2D& grid) : grid_(grid), samples_(grid.size(), Complex{}) {
  ghostsim::validate(grid);
}

ComplexField::ComplexField(const Grid2D& grid, ComplexBuffer samples)
    : grid_(grid), samples_(std::move(samples)) {
  ghostsim::validate(grid);
  if (samples_.size() != grid_.size()) {
    throw ValidationError("field: sample count " + std::to_string(samples_.size()) +
                          " does not match grid size " + std::to_string(grid_.size()));
  }
  ghostsim::validate(*this);
}

ComplexField ComplexField::constant(const Grid2D& grid, Complex value) {
  ComplexField f(grid);
  std::fill(f.samples_.begin(), f.samples_.end(), value);
  return f;
}

double ComplexField::total_power() const noexcept {
  double sum = 0.0;
  for (const auto& e : samples_) sum += std::norm(e);
  return sum * grid_.pixel_area();
}

void validate(const ComplexField& field) {
  for (const auto& e : field.samples()) {
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) {
      throw ValidationError("field: non-finite sample");
    }
  }
}

double max_abs_difference(const ComplexField& a, const ComplexField& b) {
  if (!(a.grid() == b.grid())) throw ValidationError("field: grid mismatch");
  double worst = 0.0;
  const auto sa = a.samples();
  const auto sb = b.samples();
  for (std::size_t k = 0; k < sa.size(); ++k) worst = std::max(worst, std::abs(sa[k] - sb[k]));
  return worst;
}

double IntensityMap::mean() const noexcept {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

IntensityMap intensity(const ComplexField& field) {
  IntensityMap map{field.grid(), std::vector<double>(field.grid().size())};
  const auto s = field.samples();
  for (std::size_t k = 0; k < s.size(); ++k) map.values[k] = std::norm(s[k]);
  return map;
}

namespace {

// Distance in samples from `center` to the first crossing below `threshold`
// walking in direction `step`.
double crossing(std::span<const double> p, std::size_t center, double threshold, int step) {
  const auto n = static_cast<long long>(p.size());
  long long prev = static_cast<long long>(center);
  for (long long k = prev + step; k >= 0 && k < n; k += step) {
    const double a = p[static_cast<std::size_t>(prev)];
    const double b = p[static_cast<std::size_t>(k)];
    if (b <= threshold) {
      const double base = static_cast<double>(std::llabs(prev - static_cast<long long>(center)));
      if (a > 0.0 && b > 0.0) {
        // ln p linear in d^2
        const double frac = std::clamp(std::log(a / threshold) / std::log(a / b), 0.0, 1.0);
        const double d2 = base * base + (2.0 * base + 1.0) * frac;
        return std::sqrt(d2);
      }
      return base + std::clamp((a - threshold) / (a - b), 0.0, 1.0);
    }
    prev = k;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double full_width_at_level(std::span<const double> profile, std::size_t center, double level,
                           double spacing) {
  if (center >= profile.size() || !(profile[center] > 0.0)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double threshold = level * profile[center];
  const double left = crossing(profile, center, threshold, -1);
  const double right = crossing(profile, center, threshold, +1);
  return (left + right) * spacing;
}

}  // namespace ghostsim
