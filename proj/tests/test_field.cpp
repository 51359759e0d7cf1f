#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "ghostsim/error.hpp"
#include "ghostsim/field.hpp"

using namespace ghostsim;

TEST_CASE("field construction validates size and finiteness") {
  const auto g = make_grid(4, 4, 1e-5, 1e-5, 5e-7);
  CHECK_THROWS_AS(ComplexField(g, ComplexBuffer(3)), ValidationError);
  ComplexBuffer bad(16);
  bad[5] = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(ComplexField(g, bad), ValidationError);
  const ComplexField zero(g);
  CHECK(zero.total_power() == 0.0);
}

TEST_CASE("unit plane wave has an all-ones intensity map") {
  const auto g = make_grid(8, 4, 1e-5, 1e-5, 5e-7);
  const auto f = ComplexField::constant(g, std::polar(1.0, 0.7));
  const auto map = intensity(f);
  for (double v : map.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(map.mean() == doctest::Approx(1.0));
  CHECK(f.total_power() == doctest::Approx(32 * 1e-10));
}

TEST_CASE("max_abs_difference") {
  const auto g = make_grid(4, 4, 1e-5, 1e-5, 5e-7);
  auto a = ComplexField::constant(g, {1.0, 0.0});
  auto b = a;
  CHECK(max_abs_difference(a, b) == 0.0);
  b(2, 3) = {1.0, 2.0};
  CHECK(max_abs_difference(a, b) == 2.0);
  const auto other = ComplexField::constant(make_grid(4, 2, 1e-5, 1e-5, 5e-7), {});
  CHECK_THROWS_AS(max_abs_difference(a, other), ValidationError);
}

TEST_CASE("full width at level is exact for sampled Gaussians") {
  const double sigma = 3.7;
  std::vector<double> profile(64);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double x = static_cast<double>(i) - 32.0;
    profile[i] = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma;
  CHECK(full_width_at_level(profile, 32, 0.5, 1.0) == doctest::Approx(fwhm).epsilon(1e-12));
  CHECK(full_width_at_level(profile, 32, 0.25, 2.0) ==
        doctest::Approx(2.0 * 2.0 * std::sqrt(2.0 * std::log(4.0)) * sigma).epsilon(1e-12));
  std::vector<double> flat(16, 1.0);
  CHECK(std::isnan(full_width_at_level(flat, 8, 0.5, 1.0)));
}
