#pragma once

#include <cstdint>
#include <random>

#include "markov/errors.hpp"

namespace markov {

// Deterministic random source. The engine is std::mt19937_64, whose output
// stream for a given seed is fixed by the standard, so every draw here is
// reproducible across platforms and compilers.
//
// Not thread-safe; concurrent walks each get their own Rng.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling, so the result is unbiased
  // for every n, not just powers of two.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw DomainError("next_below: n must be positive");
    const std::uint64_t threshold = (0ull - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace markov
