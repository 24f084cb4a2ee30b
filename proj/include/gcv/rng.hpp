#pragma once

#include <cmath>
#include <cstdint>

namespace gcv {

// Deterministic stream-splittable generator: a SplitMix64 hash of
// (seed, stream) seeds a xoshiro256++ state, so replication r can draw from
// stream r independently of worker scheduling.  Identical (seed, stream)
// always yields the identical sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    for (auto& si : s_) si = splitmix64(x);
    // discard a few outputs so nearby streams decorrelate
    for (int i = 0; i < 8; ++i) next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1): midpoints of a 2^52 lattice.
  double open_uniform() { return ((next() >> 12) + 0.5) * 0x1.0p-52; }

  // Standard normal via Box-Muller (caches the second variate).
  double normal() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    const double u1 = open_uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692 * u2;
    cache_ = r * std::sin(a);
    have_cache_ = true;
    return r * std::cos(a);
  }

  // Cauchy(0, scale) by inverse CDF; open_uniform keeps tan finite.
  double cauchy(double scale) {
    return scale * std::tan(3.14159265358979323846 * (open_uniform() - 0.5));
  }

  double exponential(double rate) { return -std::log(open_uniform()) / rate; }

  // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = open_uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = open_uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Student-t with dof nu, unit scale.
  double student_t(double nu) {
    const double z = normal();
    const double g = gamma(0.5 * nu) * 2.0; // chi^2_nu
    return z / std::sqrt(g / nu);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t s_[4];
  double cache_ = 0.0;
  bool have_cache_ = false;
};

} // namespace gcv
