#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qlrmr {

/// Seedable random source shared by every sampling routine in the library.
///
/// Algorithm: std::mt19937_64 whose seed is first passed through SplitMix64.
/// Uniform doubles use the top 53 bits of one engine output, normals use the
/// Marsaglia polar method (one cached spare per pair). Other implementations
/// following the same recipe match statistically; bitwise equality is only
/// promised within this implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();
  /// +1 or -1 with equal probability.
  double rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stable seed for an independent stream identified by (base, parts...).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

/// Bit pattern of a double, for using real-valued grid coordinates in derive_seed.
std::uint64_t seed_bits(double value);

}  // namespace qlrmr
