#include "cwb/presets.hpp"

#include <algorithm>

#include "cwb/rng.hpp"

namespace cwb {

namespace {

// Noise families by mechanism. Gaussian noise is reserved for the mechanisms
// that stay identifiable under it (linear non-Gaussian data is the LiNGAM
// setting); the linear-Gaussian class appears only in the dedicated
// linear-gaussian-* ratio presets.
const std::vector<std::string> kNonGaussianNoises = {"beta",        "gamma",
                                                     "gumbel",      "exponential",
                                                     "uniform",     "mlp"};
const std::vector<std::string> kAllNoises = {"beta",   "gamma",       "gaussian",
                                             "gumbel", "exponential", "uniform",
                                             "mlp"};
const std::vector<std::string> kMechanisms = {"linear", "nonlinear", "pnl"};

std::vector<std::string> noises_for(const std::string& mechanism) {
  return mechanism == "linear" ? kNonGaussianNoises : kAllNoises;
}

struct Scale {
  int train_datasets;
  int train_samples;
  int test_datasets;
  int test_samples;
  ModelConfig model;
};

Scale scale_params(const std::string& scale) {
  if (scale == "desk") {
    ModelConfig m;  // 32-wide, 2+2 layers, 4 heads: the struct defaults
    return {2000, 200, 200, 200, m};
  }
  if (scale == "paper") {
    ModelConfig m;
    m.embed_dim = 64;
    m.hidden_dim = 64;
    m.enc_layers = 8;
    m.dec_layers = 8;
    m.heads = 8;
    return {15000, 1500, 1500, 1500, m};
  }
  throw ConfigError("preset scale must be 'desk' or 'paper', got '" + scale + "'");
}

CorpusClassConfig cls(const std::string& mechanism, const std::string& noise,
                      double ratio) {
  CorpusClassConfig c;
  c.mechanism = mechanism;
  c.noise = noise;
  c.ratio = ratio;
  return c;
}

struct PresetSpec {
  std::vector<CorpusClassConfig> train_classes;
  std::vector<std::vector<CorpusClassConfig>> test_class_sets;
  bool three_class = false;
};

std::vector<CorpusClassConfig> single(const CorpusClassConfig& c) { return {c}; }

PresetSpec spec_for(const std::string& name) {
  PresetSpec s;
  auto starts_with = [&](const std::string& prefix) {
    return name.rfind(prefix, 0) == 0;
  };
  auto tail = [&](const std::string& prefix) { return name.substr(prefix.size()); };

  if (starts_with("indist-")) {
    const std::string rest = tail("indist-");
    const std::size_t dash = rest.find('-');
    require(dash != std::string::npos, "preset: malformed name " + name);
    const std::string mech = rest.substr(0, dash);
    const std::string noise = rest.substr(dash + 1);
    s.train_classes = {cls(mech, noise, 1.0)};
    s.test_class_sets = {single(cls(mech, noise, 1.0))};
    return s;
  }
  if (starts_with("ood-mech-")) {
    const std::string mech = tail("ood-mech-");
    s.train_classes = {cls(mech, "mlp", 1.0)};
    for (const std::string& m : kMechanisms)
      s.test_class_sets.push_back(single(cls(m, "mlp", 1.0)));
    return s;
  }
  if (starts_with("ood-noise-")) {
    const std::string mech = tail("ood-noise-");
    s.train_classes = {cls(mech, "mlp", 1.0)};
    for (const std::string& noise : noises_for(mech))
      s.test_class_sets.push_back(single(cls(mech, noise, 1.0)));
    return s;
  }
  if (starts_with("invertible-") || starts_with("linear-gaussian-")) {
    const bool invertible = starts_with("invertible-");
    const std::string rest = invertible ? tail("invertible-") : tail("linear-gaussian-");
    const std::size_t dash = rest.find('-');
    require(dash != std::string::npos, "preset: malformed name " + name);
    const double a = std::stod(rest.substr(0, dash)) / 100.0;
    const double b = std::stod(rest.substr(dash + 1)) / 100.0;
    require(std::abs(a + b - 1.0) < 1e-9, "preset: ratio parts must sum to 100");
    const CorpusClassConfig first = invertible ? cls("invertible_forward", "", a)
                                               : cls("linear", "gaussian", a);
    const CorpusClassConfig second = invertible ? cls("invertible_backward", "", b)
                                                : cls("nonlinear", "gaussian", b);
    if (a > 0.0) s.train_classes.push_back(first);
    if (b > 0.0) s.train_classes.push_back(second);
    if (invertible) {
      s.test_class_sets.push_back(single(cls("invertible_forward", "", 1.0)));
      s.test_class_sets.push_back(single(cls("invertible_backward", "", 1.0)));
      s.test_class_sets.push_back({cls("invertible_forward", "", 0.5),
                                   cls("invertible_backward", "", 0.5)});
    } else {
      s.test_class_sets.push_back(single(cls("linear", "gaussian", 1.0)));
      s.test_class_sets.push_back(single(cls("nonlinear", "gaussian", 1.0)));
    }
    return s;
  }
  if (starts_with("mix-mech-")) {
    const std::string combo = tail("mix-mech-");
    std::vector<std::string> mechs;
    if (combo == "linear-nonlinear") mechs = {"linear", "nonlinear"};
    else if (combo == "nonlinear-pnl") mechs = {"nonlinear", "pnl"};
    else if (combo == "linear-pnl") mechs = {"linear", "pnl"};
    else if (combo == "all") mechs = kMechanisms;
    else throw ConfigError("preset: unknown mechanism combination " + combo);
    const double r = 1.0 / static_cast<double>(mechs.size());
    for (const std::string& m : mechs) s.train_classes.push_back(cls(m, "mlp", r));
    for (const std::string& m : kMechanisms)
      s.test_class_sets.push_back(single(cls(m, "mlp", 1.0)));
    return s;
  }
  if (starts_with("mix-noise-")) {
    const std::string mech = tail("mix-noise-");
    const double r = 1.0 / static_cast<double>(kNonGaussianNoises.size());
    for (const std::string& noise : kNonGaussianNoises)
      s.train_classes.push_back(cls(mech, noise, r));
    for (const std::string& noise : kNonGaussianNoises)
      s.test_class_sets.push_back(single(cls(mech, noise, 1.0)));
    return s;
  }
  if (starts_with("three-class-")) {
    const std::string mech = tail("three-class-");
    s.three_class = true;
    s.train_classes = {cls("empty", "mlp", 0.5), cls(mech, "mlp", 0.5)};
    s.test_class_sets = {{cls("empty", "mlp", 0.5), cls(mech, "mlp", 0.5)}};
    return s;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const std::string& mech : kMechanisms)
    for (const std::string& noise : noises_for(mech))
      names.push_back("indist-" + mech + "-" + noise);
  for (const std::string& mech : kMechanisms) names.push_back("ood-mech-" + mech);
  for (const std::string& mech : kMechanisms) names.push_back("ood-noise-" + mech);
  for (const char* r : {"100-0", "75-25", "50-50", "25-75", "0-100"}) {
    names.push_back(std::string("invertible-") + r);
    names.push_back(std::string("linear-gaussian-") + r);
  }
  for (const char* c : {"linear-nonlinear", "nonlinear-pnl", "linear-pnl", "all"})
    names.push_back(std::string("mix-mech-") + c);
  for (const std::string& mech : kMechanisms) names.push_back("mix-noise-" + mech);
  for (const std::string& mech : kMechanisms) names.push_back("three-class-" + mech);
  return names;
}

ExperimentPreset make_preset(const std::string& name, const std::string& scale,
                             std::uint64_t seed) {
  const PresetSpec spec = spec_for(name);
  const Scale sc = scale_params(scale);

  ExperimentPreset p;
  p.name = name;
  p.scale = scale;

  p.train_corpus.name = name + "-train";
  p.train_corpus.num_datasets = sc.train_datasets;
  p.train_corpus.samples_per_dataset = sc.train_samples;
  p.train_corpus.seed = splitmix64(seed);
  p.train_corpus.classes = spec.train_classes;
  p.train_corpus.validate();

  for (std::size_t i = 0; i < spec.test_class_sets.size(); ++i) {
    CorpusConfig t;
    std::string suffix;
    for (const CorpusClassConfig& c : spec.test_class_sets[i])
      suffix += "-" + c.class_name();
    t.name = name + "-test" + suffix;
    t.num_datasets = sc.test_datasets;
    t.samples_per_dataset = sc.test_samples;
    t.seed = splitmix64(seed + 1 + i);
    t.classes = spec.test_class_sets[i];
    t.validate();
    p.test_corpora.push_back(std::move(t));
  }

  p.train.name = name;
  p.train.seed = seed;
  p.train.model = sc.model;
  p.train.model.three_class = spec.three_class;
  for (const CorpusClassConfig& c : spec.train_classes)
    p.train.mixture.emplace_back(c.class_name(), c.ratio);
  p.train.validate();
  return p;
}

}  // namespace cwb
