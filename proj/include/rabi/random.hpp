#pragma once

#include <cstdint>

namespace rabi {

/// Counter-based generator: every draw is a pure function of (seed, counter), so a
/// sample's random numbers do not depend on evaluation order or thread count.
/// Mixing is the SplitMix64 finalizer applied to seed + (counter + 1) * golden gamma.
class CounterRng {
 public:
  static constexpr const char* name = "splitmix64-counter";
  static constexpr int version = 1;

  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  [[nodiscard]] constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  [[nodiscard]] constexpr std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace rabi
