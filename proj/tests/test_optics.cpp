#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "ghostsim/error.hpp"
#include "ghostsim/optics.hpp"
#include "ghostsim/speckle.hpp"

using namespace ghostsim;

namespace {

Grid2D grid256() { return make_grid(256, 256, 10e-6, 10e-6, 532e-9); }

ComplexField gaussian_beam(const Grid2D& g, double w0, double x0 = 0.0, double y0 = 0.0) {
  ComplexField f(g);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double dx = g.x(i) - x0, dy = g.y(j) - y0;
      f(i, j) = std::exp(-(dx * dx + dy * dy) / (w0 * w0));
    }
  }
  return f;
}

// 1/e^2 intensity radius from the second moment along x: <x^2> = w^2 / 4.
double second_moment_radius(const ComplexField& f) {
  const auto& g = f.grid();
  double s = 0.0, sx2 = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double p = std::norm(f(i, j));
      s += p;
      sx2 += p * g.x(i) * g.x(i);
    }
  }
  return 2.0 * std::sqrt(sx2 / s);
}

std::pair<std::size_t, std::size_t> brightest(const ComplexField& f) {
  std::size_t bi = 0, bj = 0;
  double best = -1.0;
  for (std::size_t j = 0; j < f.grid().ny; ++j) {
    for (std::size_t i = 0; i < f.grid().nx; ++i) {
      if (std::norm(f(i, j)) > best) best = std::norm(f(i, j)), bi = i, bj = j;
    }
  }
  return {bi, bj};
}

}  // namespace

TEST_CASE("propagation conserves power") {
  const auto g = grid256();
  const auto src = generate_speckle(g, SpeckleSpec{}, 0, 1);
  for (double z : {0.01, 0.1, 1.0}) {
    const auto out = propagate(src, {z});
    CHECK(std::abs(out.total_power() - src.total_power()) / src.total_power() <= 1e-9);
  }
}

TEST_CASE("propagation composes as a semigroup") {
  const auto g = grid256();
  const auto src = generate_speckle(g, SpeckleSpec{}, 3, 1);
  const auto direct = propagate(src, {0.15});
  const auto stepped = propagate(propagate(src, {0.05}), {0.1});
  double peak = 0.0;
  for (auto v : direct.samples()) peak = std::max(peak, std::abs(v));
  CHECK(max_abs_difference(direct, stepped) / peak <= 1e-9);
  CHECK(propagate(src, {0.0}) == src);
  CHECK_THROWS_AS(propagate(src, {-0.1}), ValidationError);
}

TEST_CASE("plane wave picks up exp(i kz z)") {
  const auto g = make_grid(64, 32, 10e-6, 10e-6, 532e-9);
  const std::size_t mx = 3, my = 2;
  ComplexField f(g);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      f(i, j) = std::polar(1.0, 2.0 * std::numbers::pi * (double(mx * i) / g.nx + double(my * j) / g.ny));
    }
  }
  const double z = 0.07;
  const double kx = 2.0 * std::numbers::pi * mx / g.extent_x();
  const double ky = 2.0 * std::numbers::pi * my / g.extent_y();
  const double k = 2.0 * std::numbers::pi / g.wavelength;
  const Complex phase = std::polar(1.0, z * std::sqrt(k * k - kx * kx - ky * ky));
  const auto out = propagate(f, {z});
  double err = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) err = std::max(err, std::abs(out(i, j) - f(i, j) * phase));
  }
  CHECK(err < 1e-9);
}

TEST_CASE("Gaussian beam radius follows w0 sqrt(1 + (z/zR)^2)") {
  const auto g = grid256();
  const double w0 = 100e-6;
  const double zr = std::numbers::pi * w0 * w0 / g.wavelength;
  const auto beam = gaussian_beam(g, w0);
  CHECK(second_moment_radius(beam) == doctest::Approx(w0).epsilon(0.01));
  for (double z : {0.5 * zr, zr, 0.1}) {
    const double expected = w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
    CHECK(second_moment_radius(propagate(beam, {z})) == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("beam splitter makes identical copies") {
  const auto g = make_grid(32, 32, 10e-6, 10e-6, 532e-9);
  const auto f = generate_speckle(g, SpeckleSpec{}, 0, 2);
  const auto [a, b] = beam_splitter(f);
  CHECK(a == b);
  CHECK(a == f);
  const auto [h1, h2] = beam_splitter(f, true);
  CHECK(h1 == h2);
  CHECK(h1.total_power() == doctest::Approx(0.5 * f.total_power()).epsilon(1e-14));
}

TEST_CASE("masks") {
  const auto g = make_grid(64, 64, 10e-6, 10e-6, 532e-9);
  const auto two = make_two_hole_mask(g, -100e-6, 100e-6, 30e-6);
  CHECK(two.open_area() == doctest::Approx(2 * 9 * 1e-10));
  const auto pts = two.open_points();
  CHECK(pts.size() == 18);
  double sx = 0.0;
  for (auto [x, y] : pts) sx += x;
  CHECK(sx == doctest::Approx(0.0).scale(1e-9));

  CHECK_THROWS_AS(make_two_hole_mask(g, 0.0, 10e-6, 30e-6), ValidationError);   // overlap
  CHECK_THROWS_AS(make_two_hole_mask(g, -1e-3, 0.0, 30e-6), ValidationError);   // off grid
  CHECK_THROWS_AS(make_two_hole_mask(g, 0.0, 1e-4, 0.0), ValidationError);
  CHECK_THROWS_AS(ApertureMask(g, std::vector<Complex>(g.size(), 2.0)), ValidationError);

  const auto f = ComplexField::constant(g, {2.0, 0.0});
  const auto masked = apply_mask(f, two);
  CHECK(masked.total_power() == doctest::Approx(4.0 * two.open_area()));
  CHECK_THROWS_AS(apply_mask(ComplexField(make_grid(32, 32, 10e-6, 10e-6, 532e-9)), two), ValidationError);
}

TEST_CASE("imaging condition") {
  CHECK(image_distance(0.1, 0.05) == doctest::Approx(0.1));
  CHECK(image_distance(0.15, 0.05) == doctest::Approx(0.075));
  CHECK_NOTHROW(check_imaging_condition(0.1, 0.05, 0.1));
  CHECK_THROWS_AS(check_imaging_condition(0.1, 0.05, 0.12), ValidationError);
  CHECK_THROWS_AS(validate(LensSpec{0.0, {}}), ValidationError);
  CHECK_THROWS_AS(validate(LensSpec{0.05, -1.0}), ValidationError);

  const auto chain = OpticalChain::imaging(0.02, 0.1, LensSpec{0.05, {}}, 0.1);
  REQUIRE(chain.steps.size() == 3);
  CHECK(std::get<PropagationSpec>(chain.steps[0]).z == doctest::Approx(0.12));
  CHECK(chain.distance_to_first_lens() == doctest::Approx(0.12));
  CHECK(OpticalChain::free_space(0.0).steps.empty());
}

TEST_CASE("lens aperture zeroes the outer field") {
  const auto g = make_grid(64, 64, 10e-6, 10e-6, 532e-9);
  const auto phase = lens_phase(g, LensSpec{0.05, 200e-6});
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double r = std::hypot(g.x(i), g.y(j));
      const auto t = phase[g.index(i, j)];
      if (std::abs(r - 100e-6) < 1e-9) continue;
      if (r > 100e-6) {
        CHECK(t == Complex{});
      } else {
        CHECK(std::abs(t) == doctest::Approx(1.0));
        CHECK(std::arg(t * std::polar(1.0, g.wavenumber() * r * r / 0.1)) == doctest::Approx(0.0).scale(1e-9));
      }
    }
  }
}

TEST_CASE("2f-2f system images a displaced spot inverted") {
  const auto g = grid256();
  const double y0 = 0.3e-3, x0 = -0.2e-3;
  const auto spot = gaussian_beam(g, 40e-6, x0, y0);
  const auto img = image_system(spot, 0.1, LensSpec{0.05, {}}, 0.1);
  const auto [i, j] = brightest(img);
  CHECK(g.x(i) == doctest::Approx(-x0).epsilon(0.05));
  CHECK(g.y(j) == doctest::Approx(-y0).epsilon(0.05));
  const auto manual = propagate(thin_lens(propagate(spot, {0.1}), LensSpec{0.05, {}}), {0.1});
  CHECK(max_abs_difference(manual, img) == 0.0);
  const auto chained = apply_chain(spot, OpticalChain::imaging(0.0, 0.1, LensSpec{0.05, {}}, 0.1));
  CHECK(max_abs_difference(chained, img) == 0.0);
}
