#include "cwb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "cwb/io.hpp"

namespace cwb {

using nlohmann::json;

int shd(GraphLabel pred, GraphLabel truth) { return pred == truth ? 0 : 1; }

int shd(const std::array<int, 4>& adjacency, GraphLabel truth) {
  int entries = 0;
  for (int a : adjacency) {
    require(a == 0 || a == 1, "shd: adjacency entries must be 0 or 1");
    entries += a;
  }
  if (auto label = graph_label_from_adjacency(adjacency)) return shd(*label, truth);
  // Invalid decoded graphs are wrong whenever the truth has an edge; they
  // count once, with the invalid tally reported separately.
  if (truth != GraphLabel::Empty) return 1;
  return entries;
}

AdjacencyPrediction prediction_from_label(GraphLabel label) {
  AdjacencyPrediction p;
  p.adjacency = adjacency_of(label);
  for (int i = 0; i < 4; ++i) p.probs[static_cast<std::size_t>(i)] = p.adjacency[static_cast<std::size_t>(i)];
  p.graph = label;
  return p;
}

AdjacencyPrediction prediction_from_decision(const DirectionDecision& decision) {
  return prediction_from_label(decision.graph);
}

namespace {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

double outcome_mean(const std::vector<DatasetOutcome>& outcomes) {
  double sum = 0.0;
  for (const DatasetOutcome& o : outcomes) sum += o.shd;
  return sum / static_cast<double>(outcomes.size());
}

Interval normal_interval(const std::vector<DatasetOutcome>& outcomes, double mean) {
  const std::size_t n = outcomes.size();
  if (n < 2) return {mean, mean};
  double ss = 0.0;
  for (const DatasetOutcome& o : outcomes) {
    const double d = o.shd - mean;
    ss += d * d;
  }
  const double half =
      1.959963984540054 * std::sqrt(ss / static_cast<double>(n - 1) /
                                    static_cast<double>(n));
  return {std::max(0.0, mean - half), mean + half};
}

// Smallest x with I_x(a, b) >= target, by bisection on the monotone CDF.
double beta_quantile(double a, double b, double target) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_incomplete_beta(a, b, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Interval clopper_pearson_interval(const std::vector<DatasetOutcome>& outcomes) {
  long k = 0;
  const double n = static_cast<double>(outcomes.size());
  for (const DatasetOutcome& o : outcomes) {
    require(o.shd == 0 || o.shd == 1,
            "evaluate: exact interval requires 0/1 outcomes");
    k += o.shd;
  }
  const double kd = static_cast<double>(k);
  Interval ci;
  ci.low = k == 0 ? 0.0 : beta_quantile(kd, n - kd + 1.0, 0.025);
  ci.high = k == static_cast<long>(outcomes.size())
                ? 1.0
                : beta_quantile(kd + 1.0, n - kd, 0.975);
  return ci;
}

EvalReport report_from_outcomes(std::vector<DatasetOutcome> outcomes,
                                const std::string& model_id,
                                const std::string& corpus_id, bool exact_ci) {
  EvalReport r;
  r.model_id = model_id;
  r.corpus_id = corpus_id;
  r.n_datasets = static_cast<int>(outcomes.size());
  r.mean_shd = outcome_mean(outcomes);
  const Interval ci =
      exact_ci ? clopper_pearson_interval(outcomes) : normal_interval(outcomes, r.mean_shd);
  r.ci_low = ci.low;
  r.ci_high = ci.high;

  double wsum = 0.0, wshd = 0.0;
  std::map<std::string, ClassBreakdown> classes;
  for (const DatasetOutcome& o : outcomes) {
    if (o.invalid) ++r.invalid_count;
    wsum += o.weight;
    wshd += o.weight * o.shd;
    ClassBreakdown& c = classes[o.scm_class];
    c.scm_class = o.scm_class;
    c.n_datasets += 1;
    c.mean_shd += o.shd;
    if (o.invalid) ++c.invalid_count;
  }
  require(wsum > 0.0, "evaluate: dataset weights sum to zero");
  r.weighted_mean_shd = wshd / wsum;
  for (auto& [name, c] : classes) {
    c.mean_shd /= static_cast<double>(c.n_datasets);
    r.per_class.push_back(c);
  }
  r.outcomes = std::move(outcomes);
  return r;
}

}  // namespace

EvalReport evaluate(const Predictor& predict, const std::vector<Dataset>& corpus,
                    const std::string& model_id, const std::string& corpus_id,
                    int workers, bool exact_ci) {
  require(!corpus.empty(), "evaluate: corpus is empty");
  std::vector<DatasetOutcome> outcomes(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    const Dataset& d = corpus[i];
    const AdjacencyPrediction p = predict(d);
    DatasetOutcome& o = outcomes[i];
    o.scm_class = d.scm_class;
    o.shd = shd(p.adjacency, d.label);
    o.invalid = !p.graph.has_value();
    o.weight = d.weight;
  });
  return report_from_outcomes(std::move(outcomes), model_id, corpus_id, exact_ci);
}

EvalReport aggregate_runs(const std::vector<EvalReport>& reports, bool exact_ci) {
  require(!reports.empty(), "aggregate_runs: no reports");
  std::vector<DatasetOutcome> pooled;
  std::string model_id = reports.front().model_id;
  for (const EvalReport& r : reports) {
    require(r.corpus_id == reports.front().corpus_id,
            "aggregate_runs: corpus ids differ (" + r.corpus_id + " vs " +
                reports.front().corpus_id + ")");
    require(!r.outcomes.empty(),
            "aggregate_runs: report for " + r.model_id + " carries no outcomes");
    if (r.model_id != model_id) model_id += "+" + r.model_id;
    pooled.insert(pooled.end(), r.outcomes.begin(), r.outcomes.end());
  }
  return report_from_outcomes(std::move(pooled), model_id,
                              reports.front().corpus_id, exact_ci);
}

std::string eval_report_to_json(const EvalReport& r) {
  json per_class = json::array();
  for (const ClassBreakdown& c : r.per_class)
    per_class.push_back({{"scm_class", c.scm_class},
                         {"n_datasets", c.n_datasets},
                         {"mean_shd", c.mean_shd},
                         {"invalid_count", c.invalid_count}});
  json outcomes = json::array();
  for (const DatasetOutcome& o : r.outcomes)
    outcomes.push_back({o.scm_class, o.shd, o.invalid ? 1 : 0, o.weight});
  json j = {{"model_id", r.model_id},
            {"corpus_id", r.corpus_id},
            {"n_datasets", r.n_datasets},
            {"mean_shd", r.mean_shd},
            {"ci_low", r.ci_low},
            {"ci_high", r.ci_high},
            {"invalid_count", r.invalid_count},
            {"weighted_mean_shd", r.weighted_mean_shd},
            {"per_class", per_class},
            {"outcomes", outcomes}};
  return j.dump(2) + "\n";
}

EvalReport eval_report_from_json(const std::string& text) {
  EvalReport r;
  try {
    json j = json::parse(text);
    r.model_id = j.at("model_id").get<std::string>();
    r.corpus_id = j.at("corpus_id").get<std::string>();
    r.n_datasets = j.at("n_datasets").get<int>();
    r.mean_shd = j.at("mean_shd").get<double>();
    r.ci_low = j.at("ci_low").get<double>();
    r.ci_high = j.at("ci_high").get<double>();
    r.invalid_count = j.at("invalid_count").get<int>();
    r.weighted_mean_shd = j.at("weighted_mean_shd").get<double>();
    for (const auto& c : j.at("per_class"))
      r.per_class.push_back({c.at("scm_class").get<std::string>(),
                             c.at("n_datasets").get<int>(),
                             c.at("mean_shd").get<double>(),
                             c.at("invalid_count").get<int>()});
    for (const auto& o : j.at("outcomes"))
      r.outcomes.push_back({o.at(0).get<std::string>(), o.at(1).get<int>(),
                            o.at(2).get<int>() != 0, o.at(3).get<double>()});
  } catch (const json::exception& e) {
    throw IoError(std::string("eval report parse: ") + e.what());
  }
  if (r.n_datasets != static_cast<int>(r.outcomes.size()))
    throw IoError("eval report parse: n_datasets does not match outcome count");
  return r;
}

// Lentz continued fraction for the incomplete beta, standard form.
static double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-14;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta: continued fraction did not converge");
}

double regularized_incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "incomplete beta: shape parameters must be positive");
  require(x >= 0.0 && x <= 1.0, "incomplete beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace cwb
