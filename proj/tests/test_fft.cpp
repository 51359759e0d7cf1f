#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "ghostsim/error.hpp"
#include "ghostsim/fft.hpp"
#include "ghostsim/grid.hpp"
#include "ghostsim/rng.hpp"

using namespace ghostsim;

namespace {

// Direct O(N^2) DFT, sign +1 for backward.
std::vector<Complex> naive_dft(const std::vector<Complex>& in, std::size_t nx, std::size_t ny, int sign) {
  std::vector<Complex> out(nx * ny);
  for (std::size_t ky = 0; ky < ny; ++ky) {
    for (std::size_t kx = 0; kx < nx; ++kx) {
      Complex acc{};
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t x = 0; x < nx; ++x) {
          const double phase = sign * 2.0 * std::numbers::pi *
                               (static_cast<double>(kx * x) / static_cast<double>(nx) +
                                static_cast<double>(ky * y) / static_cast<double>(ny));
          acc += in[y * nx + x] * Complex(std::cos(phase), std::sin(phase));
        }
      }
      out[ky * nx + kx] = acc;
    }
  }
  return out;
}

ComplexBuffer random_buffer(std::size_t n, std::uint64_t seed) {
  Philox4x32 rng(seed, 0);
  ComplexBuffer b(n);
  for (auto& v : b) v = rng.complex_normal();
  return b;
}

}  // namespace

TEST_CASE("grid geometry and validation") {
  const auto g = make_grid(8, 6, 1e-5, 2e-5, 5e-7);
  CHECK(g.size() == 48);
  CHECK(g.x(4) == 0.0);
  CHECK(g.y(3) == 0.0);
  CHECK(g.x(0) == doctest::Approx(-4e-5));
  CHECK(g.nearest_column(0.0) == 4);
  CHECK(g.nearest_row(2e-5) == 4);
  CHECK(g.wavenumber() == doctest::Approx(2.0 * std::numbers::pi / 5e-7));
  CHECK_THROWS_AS(make_grid(0, 8, 1e-5, 1e-5, 5e-7), ValidationError);
  CHECK_THROWS_AS(make_grid(8, 8, -1e-5, 1e-5, 5e-7), ValidationError);
  CHECK_THROWS_AS(make_grid(8, 8, 1e-5, 1e-5, 0.0), ValidationError);
}

TEST_CASE("fft matches the direct DFT") {
  for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{8, 8}, {8, 6}, {5, 12}}) {
    CAPTURE(nx);
    CAPTURE(ny);
    const auto input = random_buffer(nx * ny, nx * 100 + ny);
    const std::vector<Complex> ref(input.begin(), input.end());
    const auto fwd = naive_dft(ref, nx, ny, -1);
    const auto bwd = naive_dft(ref, nx, ny, +1);
    const auto& fft = Fft2D::get(nx, ny);
    ComplexBuffer a = input, b = input;
    fft.forward(a);
    fft.backward(b);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(std::abs(a[k] - fwd[k]) < 1e-12 * static_cast<double>(nx * ny));
      CHECK(std::abs(b[k] - bwd[k]) < 1e-12 * static_cast<double>(nx * ny));
    }
  }
}

TEST_CASE("forward then backward is N times the identity") {
  const auto input = random_buffer(64 * 64, 3);
  ComplexBuffer a = input;
  const auto& fft = Fft2D::get(64, 64);
  fft.forward(a);
  fft.backward(a);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] / 4096.0 - input[k]) < 1e-13);
}

TEST_CASE("row-pruned backward transform equals the full one") {
  for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{32, 32}, {16, 24}}) {
    const auto spectrum = random_buffer(nx * ny, 11);
    ComplexBuffer full = spectrum;
    const auto& fft = Fft2D::get(nx, ny);
    fft.backward(full);
    ComplexBuffer rows_out(nx * ny, Complex{-7.0, 0.0});
    const std::size_t rows[] = {0, 3, ny / 2, ny - 1};
    fft.backward_rows(spectrum, rows, rows_out);
    for (std::size_t r : rows) {
      for (std::size_t x = 0; x < nx; ++x) CHECK(std::abs(rows_out[r * nx + x] - full[r * nx + x]) < 1e-11);
    }
    CHECK(rows_out[1 * nx] == Complex{-7.0, 0.0});  // untouched
  }
}

TEST_CASE("unaligned spans are handled") {
  ComplexBuffer big = random_buffer(8 * 8 + 1, 5);
  std::vector<Complex> copy(big.begin() + 1, big.end());
  ComplexBuffer aligned(copy.begin(), copy.end());
  const auto& fft = Fft2D::get(8, 8);
  fft.forward(std::span<Complex>(big.data() + 1, 64));
  fft.forward(aligned);
  for (std::size_t k = 0; k < 64; ++k) CHECK(big[k + 1] == aligned[k]);
}

TEST_CASE("frequency index") {
  CHECK(frequency_index(0, 8) == 0);
  CHECK(frequency_index(3, 8) == 3);
  CHECK(frequency_index(4, 8) == -4);
  CHECK(frequency_index(7, 8) == -1);
  CHECK(frequency_index(2, 5) == 2);
  CHECK(frequency_index(3, 5) == -2);
}
