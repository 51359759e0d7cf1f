#include "ghostsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace ghostsim {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// Structure-of-arrays Philox over N consecutive counters; the inner loops
// vectorize. Integer arithmetic, so every clone gives the same bits.
template <int N>
__attribute__((target_clones("avx2", "default"))) void philox_batch(std::uint64_t first, std::uint64_t stream,
                                                                    std::uint32_t k0, std::uint32_t k1,
                                                                    std::uint32_t* out) {
  std::uint32_t c0[N], c1[N], c2[N], c3[N];
  for (int i = 0; i < N; ++i) {
    const std::uint64_t p = first + static_cast<std::uint64_t>(i);
    c0[i] = static_cast<std::uint32_t>(p);
    c1[i] = static_cast<std::uint32_t>(p >> 32);
    c2[i] = static_cast<std::uint32_t>(stream);
    c3[i] = static_cast<std::uint32_t>(stream >> 32);
  }
  for (int round = 0; round < 10; ++round) {
    for (int i = 0; i < N; ++i) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0[i];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2[i];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1[i] ^ k0;
      const std::uint32_t n2 = hi0 ^ c3[i] ^ k1;
      c0[i] = n0;
      c1[i] = lo1;
      c2[i] = n2;
      c3[i] = lo0;
    }
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  for (int i = 0; i < N; ++i) {
    out[4 * i] = c0[i];
    out[4 * i + 1] = c1[i];
    out[4 * i + 2] = c2[i];
    out[4 * i + 3] = c3[i];
  }
}

}  // namespace

Philox4x32::Block Philox4x32::bijection(Block ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

Philox4x32::Philox4x32(std::uint64_t master_seed, std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      stream_(stream) {}

void Philox4x32::refill() noexcept {
  philox_batch<kBatch>(next_position_, stream_, key_[0], key_[1], words_.data());
  next_position_ += kBatch;
  cursor_ = 0;
}

Philox4x32::Block Philox4x32::next_block() noexcept {
  Block b;
  for (auto& w : b) w = word();
  return b;
}

double Philox4x32::uniform() noexcept {
  const std::uint32_t lo = word();
  const std::uint32_t hi = word();
  return to_open_unit(join(lo, hi));
}

Complex Philox4x32::complex_normal() noexcept {
  // Marsaglia polar method.
  for (;;) {
    const double v1 = (static_cast<double>(word()) + 0.5) * 0x1.0p-31 - 1.0;
    const double v2 = (static_cast<double>(word()) + 0.5) * 0x1.0p-31 - 1.0;
    const double s = v1 * v1 + v2 * v2;
    if (s < 1.0) {
      const double f = std::sqrt(-std::log(s) / s);
      return {v1 * f, v2 * f};
    }
  }
}

double Philox4x32::normal() noexcept {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const Complex w = complex_normal();
  // Each component of w has variance 1/2.
  spare_normal_ = w.imag() * std::numbers::sqrt2;
  has_spare_normal_ = true;
  return w.real() * std::numbers::sqrt2;
}

}  // namespace ghostsim
