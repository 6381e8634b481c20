#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tempofield {

/// Seeded random stream. Draws are derived from raw 64-bit engine output so
/// results do not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Builds child seeds from a master seed and a sequence of labels, so
/// independent experiment units get independent, reproducible streams.
class SeedKey {
 public:
  explicit SeedKey(std::uint64_t master) : state_(mix(master ^ 0x7465'6d70'6f66'6c64ULL)) {}

  SeedKey& add(std::string_view label);
  SeedKey& add(std::uint64_t value);

  std::uint64_t value() const { return mix(state_); }

  static std::uint64_t mix(std::uint64_t x);

 private:
  std::uint64_t state_;
};

}  // namespace tempofield
