#include "cwb/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace cwb {

namespace {

// Median-heuristic kernel bandwidth: lower median of the pairwise absolute
// differences i < j. Falls back to the mean of the nonzero differences when
// the median vanishes (heavily tied data); all-equal input is degenerate.
double median_bandwidth(const Eigen::Ref<const Vector>& u) {
  const Index n = u.size();
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) dists.push_back(std::abs(u(i) - u(j)));
  if (dists.empty()) throw NumericError("hsic: input too short");
  std::size_t mid = (dists.size() - 1) / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  double med = dists[mid];
  if (med > 0.0) return med;
  double sum = 0.0;
  std::size_t cnt = 0;
  for (double d : dists)
    if (d > 0.0) {
      sum += d;
      ++cnt;
    }
  if (cnt == 0) throw NumericError("hsic: constant input vector");
  return sum / static_cast<double>(cnt);
}

Matrix gaussian_kernel(const Eigen::Ref<const Vector>& u, double bandwidth) {
  const Index n = u.size();
  const double inv = -1.0 / (2.0 * bandwidth * bandwidth);
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      double d = u(i) - u(j);
      k(i, j) = k(j, i) = std::exp(d * d * inv);
    }
  }
  return k;
}

// K -> H K H with H = I - (1/n) 11^T.
void center_kernel(Matrix& k) {
  Vector row_mean = k.rowwise().mean();
  double grand = row_mean.mean();
  k.colwise() -= row_mean;
  k.rowwise() -= row_mean.transpose();
  k.array() += grand;
}

// Least-squares residual of v regressed on u with intercept.
Vector ols_residual(const Eigen::Ref<const Vector>& u,
                    const Eigen::Ref<const Vector>& v) {
  double mu = u.mean(), mv = v.mean();
  double var = (u.array() - mu).square().sum();
  if (var < 1e-12) throw NumericError("ols: regressor has no variance");
  double slope = ((u.array() - mu) * (v.array() - mv)).sum() / var;
  return v.array() - mv - slope * (u.array() - mu);
}

// Kernel ridge regression residual of v on u; exact for n <= 300, otherwise
// a deterministic strided Nystroem subset of 300 landmarks.
Vector krr_residual(const Eigen::Ref<const Vector>& u,
                    const Eigen::Ref<const Vector>& v) {
  constexpr double kRidge = 1e-3;
  constexpr Index kLandmarks = 300;
  const Index n = u.size();
  const double bw = median_bandwidth(u);
  const double inv = -1.0 / (2.0 * bw * bw);

  if (n <= kLandmarks) {
    Matrix k = gaussian_kernel(u, bw);
    Matrix reg = k;
    reg.diagonal().array() += kRidge;
    Vector alpha = reg.ldlt().solve(v);
    return v - k * alpha;
  }

  Vector landmarks(kLandmarks);
  for (Index i = 0; i < kLandmarks; ++i) landmarks(i) = u((i * n) / kLandmarks);
  Matrix knm(n, kLandmarks);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < kLandmarks; ++j) {
      double d = u(i) - landmarks(j);
      knm(i, j) = std::exp(d * d * inv);
    }
  Matrix kmm(kLandmarks, kLandmarks);
  for (Index i = 0; i < kLandmarks; ++i)
    for (Index j = 0; j < kLandmarks; ++j) {
      double d = landmarks(i) - landmarks(j);
      kmm(i, j) = std::exp(d * d * inv);
    }
  Matrix a = knm.transpose() * knm + kRidge * kmm;
  a.diagonal().array() += 1e-10;  // guards rank deficiency from duplicate landmarks
  Vector alpha = a.ldlt().solve(knm.transpose() * v);
  return v - knm * alpha;
}

DirectionDecision decide(double hsic_xy, double hsic_yx) {
  DirectionDecision d;
  d.score_xy = -hsic_xy;
  d.score_yx = -hsic_yx;
  d.tie = d.score_xy == d.score_yx;
  d.graph = d.score_xy >= d.score_yx ? GraphLabel::XtoY : GraphLabel::YtoX;
  return d;
}

}  // namespace

double hsic_statistic(const Eigen::Ref<const Vector>& u,
                      const Eigen::Ref<const Vector>& v) {
  require(u.size() == v.size(), "hsic: length mismatch");
  require(u.size() >= 20, "hsic: need at least 20 observations");
  Matrix k = gaussian_kernel(u, median_bandwidth(u));
  Matrix l = gaussian_kernel(v, median_bandwidth(v));
  center_kernel(k);
  double stat = (k.array() * l.array()).sum() /
                (static_cast<double>(u.size()) * static_cast<double>(u.size()));
  return std::max(stat, 0.0);
}

DirectionDecision linear_direction(const Dataset& d) {
  require(d.values.rows() >= 50, "linear_direction: need at least 50 rows");
  Vector x = d.values.col(0), y = d.values.col(1);
  double hsic_xy = hsic_statistic(x, ols_residual(x, y));
  double hsic_yx = hsic_statistic(y, ols_residual(y, x));
  return decide(hsic_xy, hsic_yx);
}

DirectionDecision anm_direction(const Dataset& d) {
  require(d.values.rows() >= 50, "anm_direction: need at least 50 rows");
  Vector x = d.values.col(0), y = d.values.col(1);
  double hsic_xy = hsic_statistic(x, krr_residual(x, y));
  double hsic_yx = hsic_statistic(y, krr_residual(y, x));
  return decide(hsic_xy, hsic_yx);
}

GraphLabel random_direction(RngStream& rng) {
  return rng.uniform01() < 0.5 ? GraphLabel::XtoY : GraphLabel::YtoX;
}

}  // namespace cwb
