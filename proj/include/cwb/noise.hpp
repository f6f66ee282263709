#pragma once

#include <optional>
#include <string>

#include "cwb/common.hpp"
#include "cwb/rng.hpp"

namespace cwb {

enum class NoiseFamily {
  Beta,
  Gamma,
  Gaussian,
  Gumbel,
  Exponential,
  Uniform,
  Mlp,
};

NoiseFamily noise_family_from_string(const std::string& name);
std::string to_string(NoiseFamily family);

// Realized random-MLP noise transform: z ~ N(0, sigma^2) pushed through a
// 1 -> 100 -> 1 sigmoid network, batch rescaled to unit empirical std.
// Sampled once per SCM instance and then fixed.
struct MlpNoiseTransform {
  double sigma = 1.0;               // input scale, drawn from U[0.5, 1]
  RowVector hidden_weights;         // 1 x 100
  Vector hidden_bias;               // 100
  Vector out_weights;               // 100
  double out_bias = 0.0;

  // Unnormalized transform of a batch (before the unit-std rescale).
  Vector apply(const Eigen::Ref<const Vector>& z) const;
};

MlpNoiseTransform make_mlp_noise_transform(RngStream& rng);

// Family plus parameters. a/b mean, per family: Beta(alpha, beta),
// Gamma(shape, scale), Gaussian(mean, stddev), Gumbel(loc, scale),
// Exponential(rate, -), Uniform(lo, hi). Mlp ignores a/b and carries the
// realized transform instead.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Gaussian;
  double a = 0.0;
  double b = 1.0;
  std::optional<MlpNoiseTransform> mlp;

  static NoiseSpec defaults(NoiseFamily family);
  // Throws ConfigError on parameters invalid for the family.
  void validate() const;
};

// n i.i.d. draws. Mlp batches are rescaled to unit empirical std, so they
// need n >= 2; other families accept n >= 1.
Vector sample_noise(const NoiseSpec& spec, Index n, RngStream& rng);

// Population standard deviation (divisor n, not n-1).
double population_std(const Eigen::Ref<const Vector>& column);

// Divides by the population std; no mean-centering. Throws NumericError on
// fewer than 2 entries or (near-)zero variance.
Vector standardize(const Eigen::Ref<const Vector>& column);

}  // namespace cwb
