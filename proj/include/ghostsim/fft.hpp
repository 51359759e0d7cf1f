#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace ghostsim {

using Complex = std::complex<double>;

namespace detail {
void* fft_alloc(std::size_t bytes);
void fft_free(void* p) noexcept;
}  // namespace detail

/// Allocator returning FFTW-aligned storage so every buffer matches the
/// alignment the cached plans were created with.
template <class T>
struct FftAllocator {
  using value_type = T;

  FftAllocator() noexcept = default;
  template <class U>
  FftAllocator(const FftAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    return static_cast<T*>(detail::fft_alloc(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t) noexcept { detail::fft_free(p); }

  template <class U>
  bool operator==(const FftAllocator<U>&) const noexcept {
    return true;
  }
};

using ComplexBuffer = std::vector<Complex, FftAllocator<Complex>>;

/// In-place 2D complex DFT for an ny x nx row-major array.
///
/// Built from batched 1D transforms: contiguous rows, then columns (via a
/// blocked transpose on square grids). Plans are created once per shape with
/// FFTW_ESTIMATE (deterministic plan selection) and shared; execution is
/// thread-safe. Both directions are unnormalized.
class Fft2D {
 public:
  static const Fft2D& get(std::size_t nx, std::size_t ny);

  void forward(std::span<Complex> data) const;
  void backward(std::span<Complex> data) const;

  /// Rows `rows` of backward(spectrum), written into the same rows of `out`;
  /// other rows of `out` are left untouched. Cheaper than a full transform
  /// when only a few rows are read.
  void backward_rows(std::span<const Complex> spectrum, std::span<const std::size_t> rows,
                     std::span<Complex> out) const;

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }

  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;
  ~Fft2D();

 private:
  Fft2D(std::size_t nx, std::size_t ny);
  void run(bool forward, std::span<Complex> data) const;
  void run_aligned(bool forward, Complex* data) const;

  std::size_t nx_;
  std::size_t ny_;
  void* rows_plan_[2] = {nullptr, nullptr};     // [backward, forward]
  void* columns_plan_[2] = {nullptr, nullptr};  // non-square grids only
  void* single_row_backward_ = nullptr;
  std::vector<Complex> column_twiddle_;         // exp(+2 pi i m / ny)
  int alignment_ = 0;
};

/// Signed DFT frequency index for bin `i` of an `n`-point transform.
inline long long frequency_index(std::size_t i, std::size_t n) noexcept {
  const auto si = static_cast<long long>(i);
  const auto sn = static_cast<long long>(n);
  return si < (sn + 1) / 2 ? si : si - sn;
}

}  // namespace ghostsim
