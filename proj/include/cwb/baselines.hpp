#pragma once

#include "cwb/common.hpp"
#include "cwb/rng.hpp"
#include "cwb/scm.hpp"

namespace cwb {

struct DirectionDecision {
  GraphLabel graph = GraphLabel::XtoY;
  double score_xy = 0.0;
  double score_yx = 0.0;
  // Exactly equal scores resolve to XtoY with the flag set (measure-zero
  // event; the flag keeps evaluations honest).
  bool tie = false;
};

// Biased HSIC estimate trace(K H L H)/n^2 with Gaussian kernels and
// median-heuristic bandwidths. Throws NumericError on a constant input.
double hsic_statistic(const Eigen::Ref<const Vector>& u,
                      const Eigen::Ref<const Vector>& v);

// OLS (with intercept) in both directions; picks the direction whose
// residual is less HSIC-dependent on its regressor. Scores are negated HSIC
// statistics, so the larger score wins.
DirectionDecision linear_direction(const Dataset& d);

// Kernel ridge regression in both directions (Gaussian kernel,
// median-heuristic bandwidth, ridge 1e-3, Nystroem subset of 300 landmarks
// for n > 300), then the same residual-independence rule.
DirectionDecision anm_direction(const Dataset& d);

// Fair coin between XtoY and YtoX.
GraphLabel random_direction(RngStream& rng);

}  // namespace cwb
