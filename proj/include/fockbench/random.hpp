#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace fockbench {

/// SplitMix64 generator. Deterministic across platforms and implementations;
/// every sampled quantity in the library is derived from it.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal pair via Box-Muller; returned as a complex number whose real and
  /// imaginary parts are independent N(0,1).
  std::complex<double> normal_pair() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  double normal() noexcept { return normal_pair().real(); }

  /// Gamma(shape, 1) by Marsaglia-Tsang, shape >= 1. Written out rather than taken from
  /// <random> so that streams agree across standard libraries.
  double gamma(double shape) noexcept {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Chi-square with 2k degrees of freedom: the squared norm of k complex normals.
  double chi_square_complex(std::size_t k) noexcept { return k == 0 ? 0.0 : 2.0 * gamma(static_cast<double>(k)); }

private:
  std::uint64_t state_;
};

/// Seed of an independent sub-stream. Keys are mixed through one SplitMix64 step each so that
/// (seed, a, b) and (seed, b, a) give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  SplitMix64 g(seed);
  std::uint64_t s = g.next();
  SplitMix64 ga(s ^ a);
  s = ga.next();
  SplitMix64 gb(s ^ (b + 0x632BE59BD9B4E019ULL));
  return gb.next();
}

/// Vector of i.i.d. complex Gaussian entries (real and imaginary parts N(0,1)).
inline std::vector<std::complex<double>> random_complex_vector(SplitMix64& rng, std::size_t n) {
  std::vector<std::complex<double>> v(n);
  for (auto& x : v) x = rng.normal_pair();
  return v;
}

}  // namespace fockbench
