#include "cwb/scm.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <filesystem>

#include "cwb/identifiability.hpp"
#include "cwb/io.hpp"
#include "cwb/schedule.hpp"

namespace cwb {

std::string to_string(GraphLabel label) {
  switch (label) {
    case GraphLabel::XtoY: return "x_to_y";
    case GraphLabel::YtoX: return "y_to_x";
    case GraphLabel::Empty: return "empty";
  }
  throw ContractError("unhandled graph label");
}

GraphLabel graph_label_from_string(const std::string& name) {
  if (name == "x_to_y") return GraphLabel::XtoY;
  if (name == "y_to_x") return GraphLabel::YtoX;
  if (name == "empty") return GraphLabel::Empty;
  throw ConfigError("unknown graph label: " + name);
}

std::array<int, 4> adjacency_of(GraphLabel label) {
  switch (label) {
    case GraphLabel::XtoY: return {0, 1, 0, 0};
    case GraphLabel::YtoX: return {0, 0, 1, 0};
    case GraphLabel::Empty: return {0, 0, 0, 0};
  }
  throw ContractError("unhandled graph label");
}

std::optional<GraphLabel> graph_label_from_adjacency(
    const std::array<int, 4>& adjacency) {
  for (int v : adjacency)
    if (v != 0 && v != 1) throw ContractError("adjacency entries must be 0/1");
  if (adjacency[0] != 0 || adjacency[3] != 0) return std::nullopt;  // self-loop
  if (adjacency[1] == 1 && adjacency[2] == 1) return std::nullopt;  // bidirected
  if (adjacency[1] == 1) return GraphLabel::XtoY;
  if (adjacency[2] == 1) return GraphLabel::YtoX;
  return GraphLabel::Empty;
}

std::string mechanism_class_name(const MechanismSpec& mechanism) {
  struct Visitor {
    std::string operator()(const LinearMechanism&) const { return "linear"; }
    std::string operator()(const NeuralNetMechanism&) const { return "nonlinear"; }
    std::string operator()(const GaussianProcessMechanism&) const { return "gp"; }
    std::string operator()(const PostNonlinearMechanism& m) const {
      if (std::holds_alternative<GaussianProcessMechanism>(m.inner)) return "pnl_gp";
      return "pnl";
    }
  };
  return std::visit(Visitor{}, mechanism);
}

Dataset swap_columns(const Dataset& d) {
  Dataset out = d;
  out.values.col(0) = d.values.col(1);
  out.values.col(1) = d.values.col(0);
  if (d.label == GraphLabel::XtoY) out.label = GraphLabel::YtoX;
  else if (d.label == GraphLabel::YtoX) out.label = GraphLabel::XtoY;
  return out;
}

double sample_linear_coefficient(RngStream& rng) {
  double magnitude = rng.uniform(0.5, 3.0);
  bool negative = rng.uniform01() < 0.5;
  return negative ? -magnitude : magnitude;
}

NeuralNetMechanism sample_nn_mechanism(RngStream& rng) {
  NeuralNetMechanism m;
  m.w1.resize(NeuralNetMechanism::kHidden);
  m.b1.resize(NeuralNetMechanism::kHidden);
  m.w2.resize(NeuralNetMechanism::kHidden);
  for (int i = 0; i < NeuralNetMechanism::kHidden; ++i) m.w1(i) = rng.gaussian();
  for (int i = 0; i < NeuralNetMechanism::kHidden; ++i) m.b1(i) = rng.gaussian();
  for (int i = 0; i < NeuralNetMechanism::kHidden; ++i) m.w2(i) = rng.gaussian();
  m.b2 = rng.gaussian();
  m.slope = NeuralNetMechanism::kPreluSlope;
  return m;
}

namespace {

Vector apply_nn(const NeuralNetMechanism& m, const Eigen::Ref<const Vector>& x) {
  Matrix h = (x * m.w1).rowwise() + m.b1.transpose();
  // Parametric ReLU.
  h = (h.array() >= 0.0).select(h, m.slope * h);
  return (h * m.w2).array() + m.b2;
}

}  // namespace

Vector apply_mechanism(const MechanismSpec& mechanism,
                       const Eigen::Ref<const Vector>& x) {
  if (const auto* lin = std::get_if<LinearMechanism>(&mechanism))
    return lin->coef * x;
  if (const auto* nn = std::get_if<NeuralNetMechanism>(&mechanism))
    return apply_nn(*nn, x);
  if (const auto* pnl = std::get_if<PostNonlinearMechanism>(&mechanism)) {
    // Deterministic inner value only; the caller adds noise before the cube.
    if (const auto* lin = std::get_if<LinearMechanism>(&pnl->inner))
      return lin->coef * x;
    if (const auto* nn = std::get_if<NeuralNetMechanism>(&pnl->inner))
      return apply_nn(*nn, x);
    throw ContractError(
        "apply_mechanism: GP inner mechanisms are sampled jointly, not "
        "evaluated pointwise");
  }
  throw ContractError(
      "apply_mechanism: GP mechanisms are sampled jointly, not evaluated "
      "pointwise");
}

Vector sample_gp_mechanism_values(const Eigen::Ref<const Vector>& parent,
                                  double bandwidth, double jitter,
                                  RngStream& rng) {
  const Index n = parent.size();
  require(n >= 1, "sample_gp_mechanism_values: need n >= 1");
  require(bandwidth > 0.0, "sample_gp_mechanism_values: bandwidth must be > 0");
  require(jitter > 0.0, "sample_gp_mechanism_values: jitter must be > 0");

  Matrix k(n, n);
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      double d = parent(i) - parent(j);
      k(i, j) = k(j, i) = std::exp(-d * d * inv);
    }
  }

  // Standard-normal draws are consumed before factorization so the draw
  // sequence does not depend on how far the jitter had to escalate.
  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = rng.gaussian();

  for (double eps = jitter; eps <= 1e-3 + 1e-15; eps *= 10.0) {
    Matrix kj = k;
    kj.diagonal().array() += eps;
    Eigen::LLT<Matrix> llt(kj);
    if (llt.info() == Eigen::Success) return llt.matrixL() * z;
  }
  throw NumericError(
      "sample_gp_mechanism_values: Cholesky failed after jitter escalation to "
      "1e-3");
}

Dataset generate_dataset(const ScmSpec& scm, Index n, RngStream& rng) {
  require(n >= 2, "generate_dataset: need n >= 2");
  scm.noise_cause.validate();
  scm.noise_effect.validate();

  constexpr int kMaxAttempts = 5;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RngStream stream = rng.fork(attempt);
    Vector cause = sample_noise(scm.noise_cause, n, stream);
    Vector effect;
    if (scm.graph == GraphLabel::Empty) {
      effect = sample_noise(scm.noise_effect, n, stream);
    } else if (const auto* gp = std::get_if<GaussianProcessMechanism>(&scm.mechanism)) {
      effect = sample_gp_mechanism_values(cause, gp->bandwidth, gp->jitter, stream) +
               sample_noise(scm.noise_effect, n, stream);
    } else if (const auto* pnl = std::get_if<PostNonlinearMechanism>(&scm.mechanism)) {
      Vector inner;
      if (const auto* gp = std::get_if<GaussianProcessMechanism>(&pnl->inner)) {
        inner = sample_gp_mechanism_values(cause, gp->bandwidth, gp->jitter, stream);
      } else {
        inner = apply_mechanism(scm.mechanism, cause);
      }
      effect = (inner + sample_noise(scm.noise_effect, n, stream))
                   .unaryExpr([](double z) { return post_nonlinear_outer(z); });
    } else {
      effect = apply_mechanism(scm.mechanism, cause) +
               sample_noise(scm.noise_effect, n, stream);
    }

    if (population_std(cause) < 1e-12 || population_std(effect) < 1e-12)
      continue;  // degenerate draw; retry with a fresh sub-seed

    Dataset d;
    d.values.resize(n, 2);
    // The cause occupies the column its graph role names: x0 for XtoY, x1
    // for YtoX. Empty graphs have no roles; the draws are independent.
    if (scm.graph == GraphLabel::YtoX) {
      d.values.col(1) = standardize(cause);
      d.values.col(0) = standardize(effect);
    } else {
      d.values.col(0) = standardize(cause);
      d.values.col(1) = standardize(effect);
    }
    d.label = scm.graph;
    d.scm_class = (scm.graph == GraphLabel::Empty ? std::string("empty")
                                                  : mechanism_class_name(scm.mechanism)) +
                  "-" + to_string(scm.noise_effect.family);
    d.seed = rng.seed();
    return d;
  }
  throw NumericError(
      "generate_dataset: degenerate column after 5 regeneration attempts");
}

void CorpusClassConfig::validate() const {
  static const char* kMechanisms[] = {"linear",  "nonlinear", "gp",
                                      "pnl",     "pnl_gp",    "invertible_forward",
                                      "invertible_backward", "empty"};
  bool known = false;
  for (const char* m : kMechanisms) known = known || mechanism == m;
  if (!known) throw ConfigError("corpus class: unknown mechanism: " + mechanism);
  if (ratio < 0.0) throw ConfigError("corpus class: negative ratio");
  if (mechanism != "invertible_forward" && mechanism != "invertible_backward") {
    NoiseSpec spec = NoiseSpec::defaults(noise_family_from_string(noise));
    if (noise_params) {
      spec.a = (*noise_params)[0];
      spec.b = (*noise_params)[1];
    }
    if (spec.family != NoiseFamily::Mlp) spec.validate();
  }
}

std::string CorpusClassConfig::class_name() const {
  if (mechanism == "invertible_forward" || mechanism == "invertible_backward")
    return mechanism;
  return mechanism + "-" + noise;
}

void CorpusConfig::validate() const {
  if (classes.empty()) throw ConfigError("corpus: no classes configured");
  if (num_datasets <= 0) throw ConfigError("corpus: num_datasets must be positive");
  if (samples_per_dataset < 2)
    throw ConfigError("corpus: samples_per_dataset must be at least 2");
  double sum = 0.0;
  for (const auto& c : classes) {
    c.validate();
    sum += c.ratio;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("corpus: mixture ratios must sum to 1");
}

namespace {

NoiseSpec noise_spec_for_class(const CorpusClassConfig& cls, RngStream& rng) {
  NoiseSpec spec = NoiseSpec::defaults(noise_family_from_string(cls.noise));
  if (cls.noise_params) {
    spec.a = (*cls.noise_params)[0];
    spec.b = (*cls.noise_params)[1];
  }
  if (spec.family == NoiseFamily::Mlp) spec.mlp = make_mlp_noise_transform(rng);
  return spec;
}

}  // namespace

Dataset make_class_dataset(const CorpusClassConfig& cls, Index n, bool flip,
                           RngStream& rng) {
  cls.validate();
  if (cls.mechanism == "invertible_forward" ||
      cls.mechanism == "invertible_backward") {
    auto direction = cls.mechanism == "invertible_forward"
                         ? InvertibleDirection::ForwardLinear
                         : InvertibleDirection::BackwardNonlinear;
    Dataset d = sample_invertible_pair(direction, n, rng);
    return flip ? swap_columns(d) : d;
  }

  ScmSpec scm;
  scm.graph = cls.mechanism == "empty" ? GraphLabel::Empty : GraphLabel::XtoY;
  // Draw order is part of the determinism contract: mechanism first, then
  // the cause noise transform, then the effect noise transform.
  if (cls.mechanism == "linear") {
    scm.mechanism = LinearMechanism{sample_linear_coefficient(rng)};
  } else if (cls.mechanism == "nonlinear") {
    scm.mechanism = sample_nn_mechanism(rng);
  } else if (cls.mechanism == "gp") {
    scm.mechanism = GaussianProcessMechanism{};
  } else if (cls.mechanism == "pnl") {
    scm.mechanism = PostNonlinearMechanism{sample_nn_mechanism(rng)};
  } else if (cls.mechanism == "pnl_gp") {
    scm.mechanism = PostNonlinearMechanism{GaussianProcessMechanism{}};
  }
  scm.noise_cause = noise_spec_for_class(cls, rng);
  scm.noise_effect = noise_spec_for_class(cls, rng);

  Dataset d = generate_dataset(scm, n, rng);
  return flip ? swap_columns(d) : d;
}

std::vector<Dataset> generate_corpus_datasets(const CorpusConfig& config,
                                              int workers) {
  config.validate();
  std::vector<double> ratios;
  for (const auto& c : config.classes) ratios.push_back(c.ratio);
  RngStream master(config.seed);
  std::vector<int> schedule =
      mixture_schedule(ratios, config.num_datasets, master.fork(0).seed());

  // Edge datasets alternate orientation in schedule order so corpus-wide
  // label counts balance within one.
  std::vector<bool> flips(schedule.size(), false);
  int edge_ordinal = 0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (config.classes[schedule[i]].mechanism == "empty") continue;
    flips[i] = (edge_ordinal % 2) == 1;
    ++edge_ordinal;
  }

  std::vector<Dataset> datasets(schedule.size());
  parallel_for(schedule.size(), workers, [&](std::size_t i) {
    RngStream stream = master.fork(i + 1);
    datasets[i] = make_class_dataset(config.classes[schedule[i]],
                                     config.samples_per_dataset, flips[i], stream);
  });
  return datasets;
}

std::vector<ManifestEntry> generate_corpus(const CorpusConfig& config,
                                           const std::string& out_dir,
                                           int workers) {
  std::vector<Dataset> datasets = generate_corpus_datasets(config, workers);
  std::filesystem::create_directories(out_dir);
  std::vector<ManifestEntry> manifest(datasets.size());
  parallel_for(datasets.size(), workers, [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "ds_%05zu.csv", i);
    write_dataset_csv((std::filesystem::path(out_dir) / name).string(),
                      datasets[i]);
    manifest[i] = {name, datasets[i].label, datasets[i].scm_class,
                   datasets[i].seed, datasets[i].weight};
  });
  write_manifest((std::filesystem::path(out_dir) / "manifest.json").string(),
                 manifest);
  return manifest;
}

}  // namespace cwb
