#include "ghostsim/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace ghostsim {

namespace detail {

void* fft_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

void fft_free(void* p) noexcept { fftw_free(p); }

}  // namespace detail

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

namespace {

// In-place transpose of an n x n array, swapping 16 x 16 tiles.
void transpose_square(Complex* a, std::size_t n) {
  constexpr std::size_t kTile = 16;
  for (std::size_t bi = 0; bi < n; bi += kTile) {
    const std::size_t ei = std::min(n, bi + kTile);
    for (std::size_t bj = bi; bj < n; bj += kTile) {
      const std::size_t ej = std::min(n, bj + kTile);
      for (std::size_t i = bi; i < ei; ++i) {
        for (std::size_t j = (bi == bj ? i + 1 : bj); j < ej; ++j) std::swap(a[i * n + j], a[j * n + i]);
      }
    }
  }
}

}  // namespace

Fft2D::Fft2D(std::size_t nx, std::size_t ny) : nx_(nx), ny_(ny) {
  const std::size_t n = nx * ny;
  auto* scratch = fftw_alloc_complex(n);
  if (scratch == nullptr) throw std::bad_alloc();
  const int cols = static_cast<int>(nx);
  const int rows = static_cast<int>(ny);
  const int signs[2] = {FFTW_BACKWARD, FFTW_FORWARD};
  for (int d = 0; d < 2; ++d) {
    rows_plan_[d] = fftw_plan_many_dft(1, &cols, rows, scratch, nullptr, 1, cols, scratch, nullptr, 1, cols,
                                       signs[d], FFTW_ESTIMATE);
    if (nx != ny) {
      columns_plan_[d] = fftw_plan_many_dft(1, &rows, cols, scratch, nullptr, cols, 1, scratch, nullptr, cols, 1,
                                            signs[d], FFTW_ESTIMATE);
    }
  }
  single_row_backward_ = fftw_plan_dft_1d(cols, scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE);
  alignment_ = fftw_alignment_of(reinterpret_cast<double*>(scratch));
  fftw_free(scratch);
  if (!rows_plan_[0] || !rows_plan_[1] || !single_row_backward_ ||
      (nx != ny && (!columns_plan_[0] || !columns_plan_[1]))) {
    throw std::runtime_error("fft: plan creation failed");
  }
  column_twiddle_.resize(ny);
  for (std::size_t m = 0; m < ny; ++m) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(ny);
    column_twiddle_[m] = Complex(std::cos(angle), std::sin(angle));
  }
}

Fft2D::~Fft2D() {
  std::lock_guard lock(planner_mutex());
  for (void* p : {rows_plan_[0], rows_plan_[1], columns_plan_[0], columns_plan_[1], single_row_backward_}) {
    if (p != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(p));
  }
}

const Fft2D& Fft2D::get(std::size_t nx, std::size_t ny) {
  auto& mutex = planner_mutex();  // constructed first so it outlives the cache
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Fft2D>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{nx, ny}];
  if (!slot) slot.reset(new Fft2D(nx, ny));
  return *slot;
}

void Fft2D::run_aligned(bool forward, Complex* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  const int d = forward ? 1 : 0;
  fftw_execute_dft(static_cast<fftw_plan>(rows_plan_[d]), p, p);
  if (nx_ == ny_) {
    transpose_square(data, nx_);
    fftw_execute_dft(static_cast<fftw_plan>(rows_plan_[d]), p, p);
    transpose_square(data, nx_);
  } else {
    fftw_execute_dft(static_cast<fftw_plan>(columns_plan_[d]), p, p);
  }
}

void Fft2D::run(bool forward, std::span<Complex> data) const {
  if (data.size() != nx_ * ny_) throw std::invalid_argument("fft: buffer size does not match plan");
  if (fftw_alignment_of(reinterpret_cast<double*>(data.data())) == alignment_) {
    run_aligned(forward, data.data());
    return;
  }
  ComplexBuffer aligned(data.begin(), data.end());
  run_aligned(forward, aligned.data());
  std::copy(aligned.begin(), aligned.end(), data.begin());
}

void Fft2D::forward(std::span<Complex> data) const { run(true, data); }
void Fft2D::backward(std::span<Complex> data) const { run(false, data); }

void Fft2D::backward_rows(std::span<const Complex> spectrum, std::span<const std::size_t> rows,
                          std::span<Complex> out) const {
  if (spectrum.size() != nx_ * ny_ || out.size() != nx_ * ny_) {
    throw std::invalid_argument("fft: buffer size does not match plan");
  }
  thread_local ComplexBuffer line;
  line.assign(nx_, Complex{});
  for (std::size_t y : rows) {
    if (y >= ny_) throw std::invalid_argument("fft: row index out of range");
    std::fill(line.begin(), line.end(), Complex{});
    for (std::size_t ky = 0; ky < ny_; ++ky) {
      const Complex w = column_twiddle_[(ky * y) % ny_];
      const Complex* src = spectrum.data() + ky * nx_;
      for (std::size_t kx = 0; kx < nx_; ++kx) line[kx] += w * src[kx];
    }
    auto* p = reinterpret_cast<fftw_complex*>(line.data());
    if (fftw_alignment_of(reinterpret_cast<double*>(p)) != alignment_) {
      throw std::runtime_error("fft: misaligned row buffer");
    }
    fftw_execute_dft(static_cast<fftw_plan>(single_row_backward_), p, p);
    std::copy(line.begin(), line.end(), out.begin() + static_cast<std::ptrdiff_t>(y * nx_));
  }
}

}  // namespace ghostsim
