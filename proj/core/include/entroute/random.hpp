#pragma once

#include <cstddef>
#include <cstdint>

namespace entroute {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent child key from (key, tag).
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag) noexcept {
  return mix64(key ^ mix64(tag + kGoldenGamma));
}

/// Counter-based SplitMix64 stream.
///
/// Element k of the stream keyed by `key` is mix64(key + (k + 1) * gamma), so
/// any element can be read directly with `at(k)` without advancing the
/// sequential cursor. Models UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Stream(std::uint64_t key) noexcept : key_(key), state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  constexpr result_type at(std::uint64_t k) const noexcept {
    return mix64(key_ + (k + 1) * kGoldenGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n); n must be positive.
  std::size_t below(std::size_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    const auto wide = static_cast<u128>((*this)()) * n;
    return static_cast<std::size_t>(wide >> 64);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t state_;
};

/// 53-bit comparison threshold for a Bernoulli(p) draw: a raw word x is a
/// success iff (x >> 11) < threshold. p >= 1 always succeeds, p <= 0 never does.
constexpr std::uint64_t bernoulli_threshold(double p) noexcept {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return std::uint64_t{1} << 53;
  return static_cast<std::uint64_t>(p * 0x1.0p53);
}

constexpr bool bernoulli_hit(std::uint64_t word, std::uint64_t threshold) noexcept {
  return (word >> 11) < threshold;
}

}  // namespace entroute
