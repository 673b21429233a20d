#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace floeda {

using Rng = std::mt19937_64;

/// Independent random streams derived from one experiment seed.
///
/// Every stream is seeded with `derive_seed(base, tag, a, b)`, a chain of
/// splitmix64 finalisers over the base seed, the stream tag and two counters
/// (typically subdomain and member index). Streams for different tags or
/// counters are statistically independent and do not depend on scheduling.
enum class Stream : std::uint64_t {
  TruthFloes = 1,
  TruthModes = 2,
  TruthNoise = 3,
  ObservationNoise = 4,
  EnsembleInit = 5,
  EnsembleForecast = 6,
  Calibration = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream tag, std::uint64_t a = 0,
                                    std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

inline Rng make_rng(std::uint64_t base, Stream tag, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(base, tag, a, b));
}

/// Standard complex normal: E|z|^2 = 1, real and imaginary parts each N(0, 1/2).
inline std::complex<double> complex_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

} // namespace floeda
