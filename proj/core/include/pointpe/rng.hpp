#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pointpe {

/// SplitMix64 finalizer; used to derive independent child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random source.
///
/// The generator is std::mt19937_64, whose output stream is specified
/// bit-for-bit by the C++ standard, so the same seed produces the same
/// stream on every platform. The standard library *distributions* are
/// implementation-defined, so all mappings to doubles are done here:
///   uniform()   -> (x >> 11) * 2^-53, in [0, 1)
///   normal()    -> Box-Muller on two fresh uniforms (no caching)
///   index(n)    -> unbiased rejection sampling, in {0, ..., n-1}
/// Every draw consumes a documented number of raw 64-bit words, which is
/// what makes the corruption/sampling contracts reproducible.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two raw words.
  double normal() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  /// Independent child stream derived from (seed, stream) by SplitMix64.
  /// Forking does not consume state from this generator.
  SeededRng fork(std::uint64_t stream) const {
    return SeededRng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace pointpe
