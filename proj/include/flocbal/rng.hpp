#pragma once

#include <cstdint>
#include <random>

namespace flocbal {

// Seeded generator with hand-rolled mappings: the distributions in <random>
// are not pinned by the standard, and bit-identical trajectories for a given
// seed are part of the determinism contract.
struct Rng {
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() { return (gen() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection to remove modulo bias.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = gen();
    } while (x >= limit);
    return x % n;
  }

  std::mt19937_64 gen;
};

}  // namespace flocbal
