#ifndef ORBITDP_RANDOM_H_
#define ORBITDP_RANDOM_H_

#include <cstdint>
#include <numbers>
#include <random>

#include "orbitdp/types.h"

namespace orbitdp {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-trial / per-chain
// streams from a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix_seed(mix_seed(base) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  // 53 random mantissa bits, shifted off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

// Complex standard Gaussian with E|z|^2 = 1.
inline Complex complex_normal(Rng& rng) {
  constexpr double kScale = 0.70710678118654752440;
  const double re = standard_normal(rng);
  const double im = standard_normal(rng);
  return {kScale * re, kScale * im};
}

inline double uniform_phase(Rng& rng) {
  return 2.0 * std::numbers::pi * uniform_open(rng);
}

}  // namespace orbitdp

#endif  // ORBITDP_RANDOM_H_
