#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nforge {

// Seeded generator with platform-independent derived draws.
//
// std::uniform_real_distribution and friends are implementation-defined, so
// doubles and geometric gaps are built directly from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Number of failures before the first success of a Bernoulli(p) sequence.
  // log1p_neg_p must be log1p(-p), precomputed by the caller.
  std::uint64_t geometric_gap(double log1p_neg_p) {
    const double u = uniform();
    const double g = std::floor(std::log1p(-u) / log1p_neg_p);
    if (!(g < 1.8e19)) return UINT64_MAX;
    return static_cast<std::uint64_t>(g);
  }

  // Uniform integer in [0, bound), bound > 0, via rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return r % bound;
  }

 private:
  std::mt19937_64 eng_;
};

// Derives an independent seed for sub-stream i of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t i) {
  std::uint64_t x = base ^ (0x9e3779b97f4a7c15ULL * (i + 1));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace nforge
