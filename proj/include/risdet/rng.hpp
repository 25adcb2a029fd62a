#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace risdet::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent engine from a master seed and a tuple of stream
/// ids (e.g. scheme, sweep index, trial index). Trials seeded this way are
/// reproducible regardless of scheduling or worker count.
inline std::mt19937_64 derive_stream(std::uint64_t master,
                                     std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix64(master ^ 0x243f6a8885a308d3ULL);
  for (std::uint64_t id : ids) h = splitmix64(h ^ id);
  return std::mt19937_64{h};
}

/// Standard circularly symmetric complex Gaussian, E|z|^2 = 1
/// (real and imaginary parts independent N(0, 1/2)).
inline std::complex<double> standard_complex_gaussian(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u1 = uni(gen);
  const double u2 = uni(gen);
  const double radius = std::sqrt(-std::log1p(-u1));  // |z|^2 ~ Exp(1)
  const double phase = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(phase), radius * std::sin(phase)};
}

/// One N(0,1) real draw (Box-Muller, cosine branch).
inline double standard_gaussian(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u1 = uni(gen);
  const double u2 = uni(gen);
  return std::sqrt(-2.0 * std::log1p(-u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// Unit-modulus QPSK symbol from {1, j, -1, -j}.
inline std::complex<double> qpsk_symbol(std::mt19937_64& gen) {
  static constexpr std::complex<double> kSymbols[4] = {
      {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  std::uniform_int_distribution<int> pick(0, 3);
  return kSymbols[pick(gen)];
}

/// Stream purpose tags used by the simulation harness; kept in one place so
/// no two consumers collide on the same derived stream.
enum class Purpose : std::uint64_t {
  kScattering = 1,
  kUserNlos = 2,
  kRandomPhases = 3,
  kCalibration = 4,
  kPfaMeasure = 5,
  kDetection = 6,
  kSelftest = 7,
};

inline std::uint64_t tag(Purpose p) { return static_cast<std::uint64_t>(p); }

}  // namespace risdet::rng
