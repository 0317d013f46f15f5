#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace comoga {

/// The single random source for every seeded computation: std::mt19937_64
/// (fully specified by the standard) with doubles built from the top 53 bits,
/// so streams are identical across platforms and standard libraries.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/u53-v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Exponential(1) by inversion.
  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace comoga
