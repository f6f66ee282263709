#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cwb/baselines.hpp"
#include "cwb/csiva.hpp"
#include "cwb/scm.hpp"

namespace cwb {

struct DatasetOutcome {
  std::string scm_class;
  int shd = 0;
  bool invalid = false;  // decoded adjacency had a self-loop or both directions
  double weight = 1.0;
};

struct ClassBreakdown {
  std::string scm_class;
  int n_datasets = 0;
  double mean_shd = 0.0;
  int invalid_count = 0;
};

struct EvalReport {
  std::string model_id;
  std::string corpus_id;
  int n_datasets = 0;
  double mean_shd = 0.0;  // unweighted arithmetic mean over datasets
  double ci_low = 0.0;    // 95% interval for the mean
  double ci_high = 0.0;
  int invalid_count = 0;
  // Per-dataset weights (unit for synthetic corpora, the catalog weight for
  // real pairs). Equals mean_shd when every weight is 1.
  double weighted_mean_shd = 0.0;
  std::vector<ClassBreakdown> per_class;
  std::vector<DatasetOutcome> outcomes;
};

// Minimal number of edge insertions, deletions, and flips separating two
// graphs. Bivariate labels are never more than one operation apart.
int shd(GraphLabel pred, GraphLabel truth);

// Row-major 2x2 binary adjacency against a truth label. Invalid adjacencies
// (self-loop or bidirected) score 1 against single-edge truths; against the
// empty truth they score their raw edit distance (one deletion per entry).
// Entries outside {0, 1} are a contract error.
int shd(const std::array<int, 4>& adjacency, GraphLabel truth);

using Predictor = std::function<AdjacencyPrediction(const Dataset&)>;

AdjacencyPrediction prediction_from_decision(const DirectionDecision& decision);
AdjacencyPrediction prediction_from_label(GraphLabel label);

// Mean SHD over the corpus with a 95% interval: normal approximation from the
// sample variance by default, Clopper-Pearson (valid for 0/1 outcomes only)
// when exact_ci is set. Per-dataset work runs on `workers` threads.
EvalReport evaluate(const Predictor& predict, const std::vector<Dataset>& corpus,
                    const std::string& model_id, const std::string& corpus_id,
                    int workers, bool exact_ci = false);

// Pools per-dataset outcomes across runs of the same corpus (typically one
// run per training seed) and recomputes the mean, interval, and breakdowns.
EvalReport aggregate_runs(const std::vector<EvalReport>& reports,
                          bool exact_ci = false);

std::string eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& text);

// Regularized incomplete beta I_x(a, b); exposed for the interval tests.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace cwb
