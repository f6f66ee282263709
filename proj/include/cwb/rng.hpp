#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cwb/common.hpp"

namespace cwb {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seeded stream over std::mt19937_64 with hand-rolled samplers (inverse-CDF
// and standard transforms only), so draw sequences are bit-identical across
// standard libraries. One stream per unit of work; fork() derives child
// streams from the construction seed alone, independent of how many draws the
// parent has made.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Child stream i; depends only on (seed, i).
  RngStream fork(std::uint64_t i) const {
    return RngStream(splitmix64(seed_ + (i + 1) * 0x9E3779B97F4A7C15ULL));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Open interval (0,1): odd numerator over 2^53, safe under log().
  double uniform01() {
    return static_cast<double>(((gen_() >> 12) << 1) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, one value per two uniforms; no cached spare, so the draw
  // count per sample is fixed.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

  double exponential(double rate) {
    require(rate > 0.0, "exponential: rate must be positive");
    return -std::log(uniform01()) / rate;
  }

  double gumbel(double loc, double scale) {
    require(scale > 0.0, "gumbel: scale must be positive");
    return loc - scale * std::log(-std::log(uniform01()));
  }

  // Marsaglia-Tsang squeeze; shape < 1 handled with the usual boost.
  double gamma(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0,
            "gamma: shape and scale must be positive");
    if (shape < 1.0) {
      double u = uniform01();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = gaussian();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform01();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return d * v * scale;
      }
    }
  }

  double beta(double alpha, double beta_param) {
    double g1 = gamma(alpha, 1.0);
    double g2 = gamma(beta_param, 1.0);
    return g1 / (g1 + g2);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace cwb
