#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace levysel {

/// Philox4x32-10 block function (Salmon et al., SC'11).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits. The
/// mapping is stateless, which is what makes a stream position addressable.
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Counter-based random stream.
///
/// Every draw is a pure function of (seed, stream id, counter): the seed is
/// the Philox key, the stream id occupies the upper half of the 128-bit
/// counter and the draw index the lower half. Two streams with different ids
/// never overlap, and a stream can be repositioned with `seek`.
class RandomStream {
public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept {
    return (std::uint64_t{key_[1]} << 32) | key_[0];
  }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  /// Number of 128-bit blocks consumed so far.
  std::uint64_t counter() const noexcept { return counter_; }

  void seek(std::uint64_t block_index) noexcept {
    counter_ = block_index;
    buffered_ = 0;
  }

  /// Next 64 random bits.
  std::uint64_t next_u64() noexcept {
    if (buffered_ == 0) {
      refill();
    }
    --buffered_;
    const std::size_t i = 2 * buffered_;
    return (std::uint64_t{block_[i + 1]} << 32) | block_[i];
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() noexcept { return -std::log(uniform()); }

  /// Standard normal via Box-Muller; always consumes two uniforms.
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  void refill() noexcept {
    const Philox4x32::Counter ctr{
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_id_),
        static_cast<std::uint32_t>(stream_id_ >> 32)};
    block_ = Philox4x32::block(ctr, key_);
    ++counter_;
    buffered_ = 2;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
  Philox4x32::Counter block_{};
  std::size_t buffered_ = 0;
};

/// Stream id for path `path_index` of experiment `experiment_index`.
/// Paths get the low 40 bits, so up to 2^40 paths per experiment.
constexpr std::uint64_t derive_stream_id(std::uint64_t experiment_index,
                                         std::uint64_t path_index) noexcept {
  return (experiment_index << 40) | (path_index & ((std::uint64_t{1} << 40) - 1));
}

}  // namespace levysel
