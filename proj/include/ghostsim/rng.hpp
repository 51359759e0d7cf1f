#pragma once

#include <array>
#include <cstdint>

#include "ghostsim/fft.hpp"

namespace ghostsim {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The key is the 64-bit master seed; the upper half of the 128-bit counter
/// is the realization index and the lower half counts blocks within that
/// realization. A realization's stream therefore depends only on
/// (master_seed, realization_index), never on which thread produced it.
///
/// Words are consumed in order: block 0 words 0..3, block 1 words 0..3, ...
/// Blocks are computed in batches, which changes speed but not values.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block bijection(Block counter, Key key) noexcept;

  Philox4x32(std::uint64_t master_seed, std::uint64_t stream) noexcept;

  /// Next four 32-bit words of the stream.
  Block next_block() noexcept;

  /// Uniform double in the open interval (0, 1) from two words, 53 bits.
  double uniform() noexcept;

  /// Circular complex normal deviate with E|w|^2 = 1 (polar method on
  /// pairs of words).
  Complex complex_normal() noexcept;

  /// Standard normal deviate.
  double normal() noexcept;

  /// 32-bit words consumed so far.
  std::uint64_t words_consumed() const noexcept { return consumed_; }

 private:
  static constexpr int kBatch = 64;  // blocks per refill

  std::uint32_t word() noexcept {
    if (cursor_ == 4 * kBatch) refill();
    ++consumed_;
    return words_[cursor_++];
  }
  void refill() noexcept;

  Key key_;
  std::uint64_t stream_;
  std::uint64_t next_position_ = 0;  // counter of the next block to compute
  std::uint64_t consumed_ = 0;
  int cursor_ = 4 * kBatch;
  std::array<std::uint32_t, 4 * kBatch> words_{};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Maps a 64-bit word to (0, 1) using the top 53 bits.
inline double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace ghostsim
