#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cwb/common.hpp"
#include "cwb/noise.hpp"
#include "cwb/rng.hpp"

namespace cwb {

enum class GraphLabel { XtoY, YtoX, Empty };

std::string to_string(GraphLabel label);
GraphLabel graph_label_from_string(const std::string& name);

// Row-major 2x2 adjacency {A00, A01, A10, A11}; A01 = edge X -> Y.
std::array<int, 4> adjacency_of(GraphLabel label);
// Inverse map; nullopt for adjacencies with diagonal or bidirected entries.
std::optional<GraphLabel> graph_label_from_adjacency(const std::array<int, 4>& adjacency);

struct LinearMechanism {
  double coef = 1.0;  // |coef| in [0.5, 3]
};

// 1 -> 10 -> 1 network with a parametric ReLU; all weights/biases drawn
// i.i.d. standard Gaussian. The negative slope is fixed (the generating
// protocol leaves it free) and recorded in provenance.
struct NeuralNetMechanism {
  static constexpr int kHidden = 10;
  static constexpr double kPreluSlope = 0.25;
  RowVector w1;  // 1 x 10
  Vector b1;     // 10
  double slope = kPreluSlope;
  Vector w2;     // 10
  double b2 = 0.0;
};

// Defined only on the sampled parent values (one joint normal draw); not a
// reusable pointwise function.
struct GaussianProcessMechanism {
  double bandwidth = 1.0;
  double jitter = 1e-6;
};

struct PostNonlinearMechanism;

using MechanismSpec = std::variant<LinearMechanism, NeuralNetMechanism,
                                   GaussianProcessMechanism, PostNonlinearMechanism>;

// Outer map fixed to z -> z^3 (invertible); the inner mechanism is any of the
// other variants. Noise is added to the inner value before the cube.
struct PostNonlinearMechanism {
  std::variant<LinearMechanism, NeuralNetMechanism, GaussianProcessMechanism> inner;
};

inline double post_nonlinear_outer(double z) { return z * z * z; }

std::string mechanism_class_name(const MechanismSpec& mechanism);

struct ScmSpec {
  GraphLabel graph = GraphLabel::XtoY;
  MechanismSpec mechanism = LinearMechanism{};
  NoiseSpec noise_cause;
  NoiseSpec noise_effect;
};

struct Dataset {
  Matrix values;  // n x 2, each column unit empirical std (divisor n)
  GraphLabel label = GraphLabel::Empty;
  std::string scm_class;
  std::uint64_t seed = 0;
  double weight = 1.0;
};

// Swaps the two columns and flips any edge label (relabeling X <-> Y).
Dataset swap_columns(const Dataset& d);

// Uniform on [-3,-0.5] U [0.5,3]; magnitude drawn first, then the sign.
double sample_linear_coefficient(RngStream& rng);

NeuralNetMechanism sample_nn_mechanism(RngStream& rng);

// Elementwise mechanism value. PostNonlinear returns only the deterministic
// inner value (the caller adds noise before the cube). GaussianProcess is
// rejected: GP mechanisms are sampled jointly, not evaluated pointwise.
Vector apply_mechanism(const MechanismSpec& mechanism, const Eigen::Ref<const Vector>& x);

// One joint draw f ~ N(0, K), K_ij = exp(-(x_i-x_j)^2 / (2 bandwidth^2)) +
// jitter * 1[i=j], via Cholesky with jitter escalated x10 up to 1e-3.
Vector sample_gp_mechanism_values(const Eigen::Ref<const Vector>& parent,
                                  double bandwidth, double jitter, RngStream& rng);

// Draws one dataset. The mechanism consumes the raw cause draw; both columns
// are standardized last. Degenerate columns trigger regeneration with a fresh
// sub-seed, at most 5 attempts.
Dataset generate_dataset(const ScmSpec& scm, Index n, RngStream& rng);

// One corpus class: mechanism in {linear, nonlinear, gp, pnl, pnl_gp,
// invertible_forward, invertible_backward, empty}; noise is a family name
// (ignored for invertible_*).
struct CorpusClassConfig {
  std::string mechanism = "linear";
  std::string noise = "uniform";
  double ratio = 1.0;
  std::optional<std::array<double, 2>> noise_params;

  void validate() const;
  std::string class_name() const;
};

struct CorpusConfig {
  std::string name;
  int num_datasets = 0;
  int samples_per_dataset = 0;
  std::uint64_t seed = 0;
  std::vector<CorpusClassConfig> classes;

  void validate() const;
};

struct ManifestEntry {
  std::string file;
  GraphLabel label = GraphLabel::Empty;
  std::string scm_class;
  std::uint64_t seed = 0;
  double weight = 1.0;
};

// Builds the dataset for schedule slot `index` of the corpus: samples a fresh
// ScmSpec from the class config and orients the edge (column swap) so labels
// alternate. flip=true swaps columns/label relative to the canonical XtoY
// generation.
Dataset make_class_dataset(const CorpusClassConfig& cls, Index n, bool flip,
                           RngStream& rng);

// In-memory corpus generation: deterministic in (config), parallel across
// datasets. Entry i is generated from fork(i) of the master stream.
std::vector<Dataset> generate_corpus_datasets(const CorpusConfig& config, int workers);

// Disk-backed variant: writes ds_xxxxx.csv files plus manifest.json (a JSON
// array of {file, label, scm_class, seed}) under out_dir.
std::vector<ManifestEntry> generate_corpus(const CorpusConfig& config,
                                           const std::string& out_dir, int workers);

}  // namespace cwb
