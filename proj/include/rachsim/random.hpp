#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace rachsim {

// SplitMix64 (Steele, Lea, Flood 2014). Eight bytes of state, so every device
// attempt can own a fresh generator without cost.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Uniform double on [0, 1) from the top 53 bits.
template <typename Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform integer on [0, n), n > 0. Multiply-shift keeps it independent of
// the standard library's distribution implementation.
__extension__ using uint128 = unsigned __int128;

template <typename Engine>
std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<uint128>(eng()) * n) >> 64);
}

enum class Stream : std::uint64_t {
  placement = 1,
  arrivals = 2,
  preamble = 3,
  detection = 4,
  harq = 5,
  backoff = 6,
};

/// Seedable source of independent named streams. A stream is addressed by its
/// name plus an arbitrary key path (device key, attempt number, gNB, ...), so
/// draws for one (device, attempt) never depend on how many draws were taken
/// elsewhere.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  SplitMix64 stream(Stream s, std::initializer_list<std::uint64_t> path = {}) const {
    std::uint64_t h = SplitMix64::mix(seed_ ^ 0x6a09e667f3bcc909ULL);
    h = SplitMix64::mix(h ^ (static_cast<std::uint64_t>(s) * 0xd1342543de82ef95ULL));
    for (std::uint64_t k : path) h = SplitMix64::mix(h + 0x9e3779b97f4a7c15ULL + k);
    return SplitMix64(h);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace rachsim
