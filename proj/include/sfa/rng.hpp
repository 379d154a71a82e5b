#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sfa {

/// splitmix64 finalizer; mixes a base seed with stream identifiers.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(base) ^ a) ^ b);
}

// std::uniform_*_distribution output differs between standard libraries; the
// helpers below use only the raw engine output, which is fully specified.

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do v = rng(); while (v >= limit);
  return v % n;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal via Box-Muller.
inline double standard_normal(std::mt19937_64& rng) {
  double u1;
  do u1 = uniform01(rng); while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Moves a uniform random `count`-subset to the front of `items`.
template <class T>
void partial_shuffle(std::vector<T>& items, std::size_t count, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count && i + 1 < items.size(); ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, items.size() - i));
    std::swap(items[i], items[j]);
  }
}

}  // namespace sfa
