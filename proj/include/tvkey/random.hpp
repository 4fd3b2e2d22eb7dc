#pragma once

#include <cstdint>
#include <random>

namespace tvkey {

/// Seeded random stream.
///
/// Every Monte Carlo unit (a cell, a chip, an attack trial) draws from its own
/// stream obtained with stream(id), so results do not depend on evaluation
/// order or on how work is split across threads. Uniform and normal variates
/// are derived from the raw 64-bit engine output here rather than through the
/// standard distributions, whose algorithms vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent child stream; the same (seed, id) always yields the same stream.
  Rng stream(std::uint64_t id) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Standard normal (Marsaglia polar method).
  double normal();

  bool bit() { return (engine_() >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tvkey
