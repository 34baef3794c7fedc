#pragma once

// Portable random streams. std::mt19937_64's output sequence is fixed by the
// standard, but the std:: distributions are not, so bounded integers and unit
// doubles are derived here directly from raw engine output.

#include <cmath>
#include <cstdint>
#include <random>

namespace exlab {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of child stream `stream` under parent seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Stateless draw keyed by a tuple of counters; used where a value must not
/// depend on the order in which it is requested.
constexpr std::uint64_t keyed_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                   std::uint64_t c) noexcept {
  return splitmix64(derive_seed(derive_seed(derive_seed(seed, a), b), c));
}

/// Uniform integer in [0, bound) from a 64-bit word; `bound` must be > 0.
/// The modulo bias is below 2^-40 for every bound this library uses.
constexpr std::uint64_t bounded(std::uint64_t word, std::uint64_t bound) noexcept {
  return word % bound;
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent child generator for stream index `stream`.
  static Rng stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, stream));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound), exact (rejection sampling).
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t w;
    do {
      w = engine_();
    } while (w >= limit);
    return w % bound;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard exponential variate.
  double exponential() { return -std::log1p(-uniform01()); }

private:
  std::mt19937_64 engine_;
};

} // namespace exlab
