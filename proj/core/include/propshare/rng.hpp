#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace propshare::rng {

// Deterministic stream derivation. Every randomized component draws from its
// own child stream keyed by (base seed, purpose tag, parameters), so adding a
// consumer never shifts another one's draws. Scheme: fold each tag into the
// state with the splitmix64 finalizer. The engine is std::mt19937_64, whose
// output sequence is fixed by the standard; doubles are built from the top 53
// bits, so generated values are reproducible across platforms.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
inline std::uint64_t mix(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t state = mix(base);
  for (std::uint64_t tag : tags) state = mix(state ^ tag);
  return state;
}

// Purpose tags (arbitrary fixed constants, one per consumer).
inline constexpr std::uint64_t kStreamUniformPrefs = 0x75707265667331ULL;
inline constexpr std::uint64_t kStreamCorrelatedPrefs = 0x63707265667331ULL;

inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(seed); }

// Uniform draw in [0, 1) with 53-bit resolution.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Unbiased draw from [0, bound) by rejection; bound >= 1.
inline std::uint64_t below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
  std::uint64_t draw;
  do {
    draw = gen();
  } while (draw >= limit);
  return draw % bound;
}

// Fisher-Yates with explicit draws (std::shuffle's algorithm is
// implementation-defined; this one is portable).
template <typename T>
void shuffle(std::vector<T>& values, std::mt19937_64& gen) {
  for (std::size_t i = values.size(); i > 1; --i)
    std::swap(values[i - 1], values[below(gen, i)]);
}

}  // namespace propshare::rng
