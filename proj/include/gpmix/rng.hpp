#pragma once

#include <cstdint>
#include <limits>

namespace gpmix {

/// SplitMix64 (Steele, Lea, Flood 2014): state advances by the golden-ratio
/// increment and each output is a bijective mix of the state, so the stream
/// is a pure function of (key, counter). Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  explicit SplitMix64(std::uint64_t key) : state_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Key of the independent stream `index` derived from a master seed:
  /// mix(seed + kGolden * (index + 1)).
  static constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) {
    return mix(seed + kGolden * (index + 1));
  }

  result_type operator()() {
    state_ += kGolden;
    return mix(state_);
  }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do x = (*this)();
    while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
};

}  // namespace gpmix
