// Mechanism sampling, dataset generation, and corpus assembly.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cwb/scm.hpp"

using namespace cwb;

namespace {

ScmSpec lingam_spec(double coef, NoiseFamily fam = NoiseFamily::Uniform) {
  ScmSpec s;
  s.graph = GraphLabel::XtoY;
  s.mechanism = LinearMechanism{coef};
  s.noise_cause = NoiseSpec::defaults(fam);
  s.noise_effect = NoiseSpec::defaults(fam);
  return s;
}

}  // namespace

TEST_CASE("graph labels map bijectively onto single-edge adjacencies") {
  for (GraphLabel g : {GraphLabel::XtoY, GraphLabel::YtoX, GraphLabel::Empty}) {
    auto back = graph_label_from_adjacency(adjacency_of(g));
    REQUIRE(back.has_value());
    CHECK(*back == g);
    CHECK(graph_label_from_string(to_string(g)) == g);
  }
  CHECK(adjacency_of(GraphLabel::XtoY) == std::array<int, 4>{0, 1, 0, 0});
  CHECK(adjacency_of(GraphLabel::YtoX) == std::array<int, 4>{0, 0, 1, 0});
  CHECK(adjacency_of(GraphLabel::Empty) == std::array<int, 4>{0, 0, 0, 0});
  CHECK_FALSE(graph_label_from_adjacency({1, 0, 0, 0}).has_value());  // self-loop
  CHECK_FALSE(graph_label_from_adjacency({0, 1, 1, 0}).has_value());  // bidirected
  CHECK_FALSE(graph_label_from_adjacency({0, 1, 0, 1}).has_value());
}

TEST_CASE("linear coefficients are uniform on the two-sided magnitude band") {
  RngStream rng(17);
  int neg = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double c = sample_linear_coefficient(rng);
    REQUIRE(std::abs(c) >= 0.5);
    REQUIRE(std::abs(c) <= 3.0);
    if (c < 0.0) ++neg;
  }
  CHECK(std::abs(static_cast<double>(neg) / n - 0.5) < 0.01);

  RngStream r1(5), r2(5);
  CHECK(sample_linear_coefficient(r1) == sample_linear_coefficient(r2));
}

TEST_CASE("neural-net mechanisms have 1->10->1 shape and Gaussian weights") {
  RngStream r1(3), r2(3);
  NeuralNetMechanism a = sample_nn_mechanism(r1);
  NeuralNetMechanism b = sample_nn_mechanism(r2);
  CHECK(a.w1.cols() == 10);
  CHECK(a.b1.size() == 10);
  CHECK(a.w2.size() == 10);
  CHECK(a.slope == NeuralNetMechanism::kPreluSlope);
  CHECK(a.w1 == b.w1);
  CHECK(a.b1 == b.b1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b2 == b.b2);

  // Moments over 10^4 first-layer weights.
  RngStream many(8);
  double sum = 0.0, sumsq = 0.0;
  const int reps = 1000;
  for (int i = 0; i < reps; ++i) {
    NeuralNetMechanism m = sample_nn_mechanism(many);
    sum += m.w1.sum();
    sumsq += m.w1.array().square().sum();
  }
  const double n = reps * 10.0;
  const double mean = sum / n;
  const double sd = std::sqrt(sumsq / n - mean * mean);
  CHECK(std::abs(mean) < 0.04);
  CHECK(std::abs(sd - 1.0) < 0.03);
}

TEST_CASE("apply_mechanism pointwise semantics") {
  Vector x(2);
  x << 1.0, -1.0;
  Vector lin = apply_mechanism(LinearMechanism{2.0}, x);
  CHECK(lin(0) == 2.0);
  CHECK(lin(1) == -2.0);

  CHECK(post_nonlinear_outer(2.0) == 8.0);

  // PostNonlinear returns only the deterministic inner value; the caller adds
  // noise before the cube.
  Vector two(1);
  two << 2.0;
  Vector inner = apply_mechanism(PostNonlinearMechanism{LinearMechanism{2.0}}, two);
  CHECK(inner(0) == 4.0);

  NeuralNetMechanism zero;
  zero.w1 = RowVector::Zero(10);
  zero.b1 = Vector::Zero(10);
  zero.w2 = Vector::Zero(10);
  zero.b2 = 1.5;
  Vector c = apply_mechanism(zero, x);
  CHECK(c(0) == 1.5);
  CHECK(c(1) == 1.5);

  CHECK_THROWS_AS(apply_mechanism(GaussianProcessMechanism{}, x), ContractError);
}

TEST_CASE("gp mechanism draws are joint normals with the RBF kernel") {
  RngStream rng(12);
  Vector one(1);
  one << 0.3;
  Vector f1 = sample_gp_mechanism_values(one, 1.0, 1e-6, rng);
  REQUIRE(f1.size() == 1);
  CHECK(std::isfinite(f1(0)));

  // Duplicate parent values force near-equal function values (kernel
  // degeneracy); bound uses the worst-case escalated jitter.
  Vector dup(3);
  dup << 0.7, 0.7, -1.3;
  for (std::uint64_t s = 0; s < 20; ++s) {
    RngStream r(100 + s);
    Vector f = sample_gp_mechanism_values(dup, 1.0, 1e-6, r);
    CHECK(std::abs(f(0) - f(1)) <= 6.0 * std::sqrt(2.0 * 1e-3));
  }

  // Marginal variance at fixed points is 1 within 25% across repetitions.
  RngStream prng(55);
  Vector parent(500);
  for (Index i = 0; i < parent.size(); ++i) parent(i) = prng.uniform(-3.0, 3.0);
  const int reps = 200;
  double s0 = 0.0, s0sq = 0.0, s7 = 0.0, s7sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream rr(900 + static_cast<std::uint64_t>(r));
    Vector f = sample_gp_mechanism_values(parent, 1.0, 1e-6, rr);
    s0 += f(0);
    s0sq += f(0) * f(0);
    s7 += f(7);
    s7sq += f(7) * f(7);
  }
  double var0 = s0sq / reps - (s0 / reps) * (s0 / reps);
  double var7 = s7sq / reps - (s7 / reps) * (s7 / reps);
  CHECK(var0 > 0.75);
  CHECK(var0 < 1.25);
  CHECK(var7 > 0.75);
  CHECK(var7 < 1.25);
}

TEST_CASE("generate_dataset standardizes columns and labels the graph") {
  RngStream rng(71);
  Dataset d = generate_dataset(lingam_spec(2.2), 1500, rng);
  REQUIRE(d.values.rows() == 1500);
  REQUIRE(d.values.cols() == 2);
  CHECK(d.label == GraphLabel::XtoY);
  CHECK(d.scm_class == "linear-uniform");
  for (int c : {0, 1}) {
    double sd = population_std(d.values.col(c));
    CHECK(std::abs(sd - 1.0) < 1e-9);
  }
}

TEST_CASE("empty-graph datasets are uncorrelated noise pairs") {
  int small = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    ScmSpec spec;
    spec.graph = GraphLabel::Empty;
    spec.noise_cause = NoiseSpec::defaults(NoiseFamily::Gaussian);
    spec.noise_effect = NoiseSpec::defaults(NoiseFamily::Gaussian);
    RngStream rng(3000 + static_cast<std::uint64_t>(s));
    Dataset d = generate_dataset(spec, 1000, rng);
    CHECK(d.label == GraphLabel::Empty);
    const auto x = d.values.col(0).array();
    const auto y = d.values.col(1).array();
    double corr = ((x - x.mean()) * (y - y.mean())).mean() /
                  (std::sqrt((x - x.mean()).square().mean()) *
                   std::sqrt((y - y.mean()).square().mean()));
    if (std::abs(corr) < 0.1) ++small;
  }
  CHECK(small >= 95);
}

TEST_CASE("degenerate noise exhausts regeneration attempts") {
  ScmSpec spec = lingam_spec(3.0);
  spec.noise_cause = NoiseSpec{NoiseFamily::Uniform, 1.0, 1.0, {}};  // zero variance
  RngStream rng(9);
  CHECK_THROWS_AS(generate_dataset(spec, 100, rng), NumericError);
}

TEST_CASE("dataset generation is deterministic in the stream seed") {
  RngStream a(123), b(123), c(124);
  Dataset da = generate_dataset(lingam_spec(1.3), 200, a);
  Dataset db = generate_dataset(lingam_spec(1.3), 200, b);
  Dataset dc = generate_dataset(lingam_spec(1.3), 200, c);
  CHECK(da.values == db.values);
  CHECK(da.values != dc.values);
}

TEST_CASE("linear pipeline is invariant to noise scale") {
  // Scaling both noise terms by c > 0 commutes with the homogeneous linear
  // mechanism and cancels in standardization.
  ScmSpec unit = lingam_spec(1.7, NoiseFamily::Gaussian);
  ScmSpec coarse = unit;
  coarse.noise_cause.b = 3.0;
  coarse.noise_effect.b = 3.0;
  RngStream r1(88), r2(88);
  Dataset d1 = generate_dataset(unit, 300, r1);
  Dataset d2 = generate_dataset(coarse, 300, r2);
  CHECK((d1.values - d2.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("swap_columns flips the label and is an involution") {
  RngStream rng(31);
  Dataset d = generate_dataset(lingam_spec(0.9), 50, rng);
  Dataset s = swap_columns(d);
  CHECK(s.label == GraphLabel::YtoX);
  CHECK(s.values.col(0) == d.values.col(1));
  CHECK(s.values.col(1) == d.values.col(0));
  Dataset ss = swap_columns(s);
  CHECK(ss.label == d.label);
  CHECK(ss.values == d.values);

  Dataset e;
  e.values = d.values;
  e.label = GraphLabel::Empty;
  CHECK(swap_columns(e).label == GraphLabel::Empty);
}

TEST_CASE("corpus generation apportions classes and balances labels") {
  CorpusConfig cfg;
  cfg.name = "mix";
  cfg.num_datasets = 10;
  cfg.samples_per_dataset = 60;
  cfg.seed = 4;
  cfg.classes = {{"linear", "uniform", 0.5, {}}, {"pnl", "uniform", 0.5, {}}};
  cfg.validate();
  auto datasets = generate_corpus_datasets(cfg, 2);
  REQUIRE(datasets.size() == 10);
  std::map<std::string, int> by_class;
  int xy = 0, yx = 0;
  for (const auto& d : datasets) {
    by_class[d.scm_class]++;
    if (d.label == GraphLabel::XtoY) ++xy;
    if (d.label == GraphLabel::YtoX) ++yx;
  }
  CHECK(by_class["linear-uniform"] == 5);
  CHECK(by_class["pnl-uniform"] == 5);
  CHECK(std::abs(xy - yx) <= 1);

  // Exact division across three classes.
  CorpusConfig three;
  three.name = "thirds";
  three.num_datasets = 3;
  three.samples_per_dataset = 40;
  three.classes = {{"linear", "uniform", 1.0 / 3, {}},
                   {"nonlinear", "gaussian", 1.0 / 3, {}},
                   {"empty", "gaussian", 1.0 / 3, {}}};
  auto ds3 = generate_corpus_datasets(three, 1);
  std::set<std::string> seen;
  for (const auto& d : ds3) seen.insert(d.scm_class);
  CHECK(seen.size() == 3);
}

TEST_CASE("label balance holds for odd corpus sizes") {
  CorpusConfig cfg;
  cfg.name = "odd";
  cfg.num_datasets = 11;
  cfg.samples_per_dataset = 50;
  cfg.seed = 10;
  cfg.classes = {{"nonlinear", "gaussian", 1.0, {}}};
  auto datasets = generate_corpus_datasets(cfg, 1);
  int xy = 0, yx = 0;
  for (const auto& d : datasets) {
    if (d.label == GraphLabel::XtoY) ++xy;
    if (d.label == GraphLabel::YtoX) ++yx;
  }
  CHECK(xy + yx == 11);
  CHECK(std::abs(xy - yx) <= 1);
}

TEST_CASE("corpus generation is deterministic and worker-count independent") {
  CorpusConfig cfg;
  cfg.name = "det";
  cfg.num_datasets = 12;
  cfg.samples_per_dataset = 40;
  cfg.seed = 77;
  cfg.classes = {{"gp", "gumbel", 0.5, {}}, {"pnl_gp", "beta", 0.5, {}}};
  auto a = generate_corpus_datasets(cfg, 1);
  auto b = generate_corpus_datasets(cfg, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].values == b[i].values);
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].scm_class == b[i].scm_class);
    CHECK(a[i].seed == b[i].seed);
  }
}

TEST_CASE("corpus config validation") {
  CorpusConfig cfg;
  cfg.name = "bad";
  cfg.num_datasets = 10;
  cfg.samples_per_dataset = 50;
  cfg.classes = {{"linear", "uniform", 0.45, {}}, {"pnl", "uniform", 0.45, {}}};
  CHECK_THROWS_WITH_AS(cfg.validate(), "corpus: mixture ratios must sum to 1",
                       ConfigError);

  cfg.classes = {{"sigmoid", "uniform", 1.0, {}}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg.classes = {{"linear", "uniform", 1.0, {}}};
  cfg.num_datasets = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg.num_datasets = 10;
  cfg.samples_per_dataset = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg.samples_per_dataset = 50;
  cfg.classes.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  // Invertible-pair classes ignore the noise field.
  CorpusClassConfig inv{"invertible_forward", "", 1.0, {}};
  CHECK_NOTHROW(inv.validate());
}

TEST_CASE("mlp-noise corpora carry per-dataset realized transforms") {
  CorpusConfig cfg;
  cfg.name = "mlp";
  cfg.num_datasets = 6;
  cfg.samples_per_dataset = 80;
  cfg.seed = 5;
  cfg.classes = {{"linear", "mlp", 1.0, {}}};
  auto datasets = generate_corpus_datasets(cfg, 1);
  for (const auto& d : datasets) {
    CHECK(d.scm_class == "linear-mlp");
    CHECK(std::abs(population_std(d.values.col(0)) - 1.0) < 1e-9);
    CHECK(std::abs(population_std(d.values.col(1)) - 1.0) < 1e-9);
  }
  // Different datasets realize different transforms.
  CHECK(datasets[0].values != datasets[1].values);
}
