#include "cwb/noise.hpp"

#include <cmath>

namespace cwb {

NoiseFamily noise_family_from_string(const std::string& name) {
  if (name == "beta") return NoiseFamily::Beta;
  if (name == "gamma") return NoiseFamily::Gamma;
  if (name == "gaussian") return NoiseFamily::Gaussian;
  if (name == "gumbel") return NoiseFamily::Gumbel;
  if (name == "exponential") return NoiseFamily::Exponential;
  if (name == "uniform") return NoiseFamily::Uniform;
  if (name == "mlp") return NoiseFamily::Mlp;
  throw ConfigError("unknown noise family: " + name);
}

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Beta: return "beta";
    case NoiseFamily::Gamma: return "gamma";
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::Gumbel: return "gumbel";
    case NoiseFamily::Exponential: return "exponential";
    case NoiseFamily::Uniform: return "uniform";
    case NoiseFamily::Mlp: return "mlp";
  }
  throw ContractError("unhandled noise family");
}

Vector MlpNoiseTransform::apply(const Eigen::Ref<const Vector>& z) const {
  // H = sigmoid(z * w1 + b1): (n, 100)
  Matrix h = (z * hidden_weights).rowwise() + hidden_bias.transpose();
  h = (1.0 + (-h.array()).exp()).inverse();
  return (h * out_weights).array() + out_bias;
}

MlpNoiseTransform make_mlp_noise_transform(RngStream& rng) {
  constexpr int kHidden = 100;
  MlpNoiseTransform t;
  t.sigma = rng.uniform(0.5, 1.0);
  t.hidden_weights.resize(kHidden);
  t.hidden_bias.resize(kHidden);
  t.out_weights.resize(kHidden);
  for (int i = 0; i < kHidden; ++i) t.hidden_weights(i) = rng.uniform(-1.5, 1.5);
  for (int i = 0; i < kHidden; ++i) t.hidden_bias(i) = rng.uniform(-1.5, 1.5);
  for (int i = 0; i < kHidden; ++i) t.out_weights(i) = rng.uniform(-1.5, 1.5);
  t.out_bias = rng.uniform(-1.5, 1.5);
  return t;
}

NoiseSpec NoiseSpec::defaults(NoiseFamily family) {
  NoiseSpec spec;
  spec.family = family;
  switch (family) {
    case NoiseFamily::Beta: spec.a = 2.0; spec.b = 2.0; break;
    case NoiseFamily::Gamma: spec.a = 2.0; spec.b = 2.0; break;
    case NoiseFamily::Gaussian: spec.a = 0.0; spec.b = 1.0; break;
    case NoiseFamily::Gumbel: spec.a = 0.0; spec.b = 1.0; break;
    case NoiseFamily::Exponential: spec.a = 1.0; spec.b = 0.0; break;
    case NoiseFamily::Uniform: spec.a = -1.0; spec.b = 1.0; break;
    case NoiseFamily::Mlp: spec.a = 0.0; spec.b = 0.0; break;
  }
  return spec;
}

void NoiseSpec::validate() const {
  switch (family) {
    case NoiseFamily::Beta:
      if (!(a > 0.0) || !(b > 0.0))
        throw ConfigError("beta noise: shape parameters must be positive");
      break;
    case NoiseFamily::Gamma:
      if (!(a > 0.0) || !(b > 0.0))
        throw ConfigError("gamma noise: shape and scale must be positive");
      break;
    case NoiseFamily::Gaussian:
      // stddev 0 is allowed as an (intentionally degenerate) point mass.
      if (!(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw ConfigError("gaussian noise: stddev must be >= 0 and finite");
      break;
    case NoiseFamily::Gumbel:
      if (!(b > 0.0) || !std::isfinite(a))
        throw ConfigError("gumbel noise: scale must be positive");
      break;
    case NoiseFamily::Exponential:
      if (!(a > 0.0))
        throw ConfigError("exponential noise: rate must be positive");
      break;
    case NoiseFamily::Uniform:
      // lo == hi is allowed (degenerate); lo > hi is not.
      if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
        throw ConfigError("uniform noise: bounds must satisfy lo <= hi");
      break;
    case NoiseFamily::Mlp:
      if (!mlp.has_value())
        throw ConfigError("mlp noise: spec carries no realized transform");
      if (!(mlp->sigma > 0.0))
        throw ConfigError("mlp noise: sigma must be positive");
      break;
  }
}

Vector sample_noise(const NoiseSpec& spec, Index n, RngStream& rng) {
  spec.validate();
  require(n >= 1, "sample_noise: need n >= 1");
  Vector out(n);
  switch (spec.family) {
    case NoiseFamily::Beta:
      for (Index i = 0; i < n; ++i) out(i) = rng.beta(spec.a, spec.b);
      return out;
    case NoiseFamily::Gamma:
      for (Index i = 0; i < n; ++i) out(i) = rng.gamma(spec.a, spec.b);
      return out;
    case NoiseFamily::Gaussian:
      for (Index i = 0; i < n; ++i) out(i) = rng.gaussian(spec.a, spec.b);
      return out;
    case NoiseFamily::Gumbel:
      for (Index i = 0; i < n; ++i) out(i) = rng.gumbel(spec.a, spec.b);
      return out;
    case NoiseFamily::Exponential:
      for (Index i = 0; i < n; ++i) out(i) = rng.exponential(spec.a);
      return out;
    case NoiseFamily::Uniform:
      for (Index i = 0; i < n; ++i) out(i) = rng.uniform(spec.a, spec.b);
      return out;
    case NoiseFamily::Mlp: {
      if (n < 2)
        throw NumericError("mlp noise: batch rescale needs n >= 2");
      Vector z(n);
      for (Index i = 0; i < n; ++i) z(i) = rng.gaussian(0.0, spec.mlp->sigma);
      return standardize(spec.mlp->apply(z));
    }
  }
  throw ContractError("unhandled noise family");
}

double population_std(const Eigen::Ref<const Vector>& column) {
  double mean = column.mean();
  double var = (column.array() - mean).square().sum() /
               static_cast<double>(column.size());
  return std::sqrt(var);
}

Vector standardize(const Eigen::Ref<const Vector>& column) {
  if (column.size() < 2)
    throw NumericError("standardize: need at least 2 entries");
  double sd = population_std(column);
  if (!std::isfinite(sd) || sd < 1e-12)
    throw NumericError("standardize: degenerate column (near-zero variance)");
  return column / sd;
}

}  // namespace cwb
