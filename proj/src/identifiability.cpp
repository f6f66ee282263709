#include "cwb/identifiability.hpp"

#include <cmath>

#include "cwb/noise.hpp"

namespace cwb {

namespace {

constexpr double kGridLo = -5.0;
constexpr double kGridHi = 5.0;
constexpr int kMonotoneGridPoints = 100;
constexpr double kUndefinedTol = 1e-12;

// 1/(1+e^t), computed without overflow for large |t|.
double logistic_sigma(double t) {
  if (t >= 0.0) {
    double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// log(1+e^t) without overflow.
double log1p_exp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

}  // namespace

Fn1D Fn1D::from_function(std::function<double(double)> fn, double h) {
  require(h > 0.0, "Fn1D: step must be positive");
  Fn1D out;
  out.f = fn;
  out.d1 = [fn, h](double x) { return (fn(x + h) - fn(x - h)) / (2.0 * h); };
  out.d2 = [fn, h](double x) {
    return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h);
  };
  out.d3 = [fn, h](double x) {
    return (fn(x + 2.0 * h) - 2.0 * fn(x + h) + 2.0 * fn(x - h) -
            fn(x - 2.0 * h)) /
           (2.0 * h * h * h);
  };
  return out;
}

Fn1D fn_identity() {
  return {[](double x) { return x; }, [](double) { return 1.0; },
          [](double) { return 0.0; }, [](double) { return 0.0; }};
}

Fn1D fn_negation() {
  return {[](double x) { return -x; }, [](double) { return -1.0; },
          [](double) { return 0.0; }, [](double) { return 0.0; }};
}

Fn1D fn_cube() {
  return {[](double x) { return x * x * x; },
          [](double x) { return 3.0 * x * x; }, [](double x) { return 6.0 * x; },
          [](double) { return 6.0; }};
}

Fn1D fn_linear(double coef) {
  return {[coef](double x) { return coef * x; },
          [coef](double) { return coef; }, [](double) { return 0.0; },
          [](double) { return 0.0; }};
}

Fn1D fn_log1p_exp_neg() {
  // g(y) = log(1+e^{-y}); with s = 1/(1+e^y):
  //   g' = -s, g'' = s(1-s), g''' = -s(1-s)(1-2s).
  return {[](double y) { return log1p_exp(-y); },
          [](double y) { return -logistic_sigma(y); },
          [](double y) {
            double s = logistic_sigma(y);
            return s * (1.0 - s);
          },
          [](double y) {
            double s = logistic_sigma(y);
            return -s * (1.0 - s) * (1.0 - 2.0 * s);
          }};
}

Fn1D compose(const Fn1D& outer, const Fn1D& inner) {
  Fn1D out;
  out.f = [outer, inner](double x) { return outer.f(inner.f(x)); };
  out.d1 = [outer, inner](double x) {
    return outer.d1(inner.f(x)) * inner.d1(x);
  };
  out.d2 = [outer, inner](double x) {
    double b = inner.f(x), b1 = inner.d1(x);
    return outer.d2(b) * b1 * b1 + outer.d1(b) * inner.d2(x);
  };
  out.d3 = [outer, inner](double x) {
    double b = inner.f(x), b1 = inner.d1(x), b2 = inner.d2(x);
    return outer.d3(b) * b1 * b1 * b1 + 3.0 * outer.d2(b) * b1 * b2 +
           outer.d1(b) * inner.d3(x);
  };
  return out;
}

LogDensity1D LogDensity1D::standard_gaussian() {
  static const double kLogNorm = 0.5 * std::log(2.0 * M_PI);
  LogDensity1D d;
  d.log_pdf = [](double x) { return -0.5 * x * x - kLogNorm; };
  d.d1 = [](double x) { return -x; };
  d.d2 = [](double) { return -1.0; };
  d.d3 = [](double) { return 0.0; };
  d.support_lo = -8.0;
  d.support_hi = 8.0;
  return d;
}

LogDensity1D LogDensity1D::standard_gumbel() {
  LogDensity1D d;
  d.log_pdf = [](double x) { return -x - std::exp(-x); };
  d.d1 = [](double x) { return -1.0 + std::exp(-x); };
  d.d2 = [](double x) { return -std::exp(-x); };
  d.d3 = [](double x) { return std::exp(-x); };
  d.support_lo = -4.0;
  d.support_hi = 30.0;
  return d;
}

LogDensity1D LogDensity1D::standard_logistic() {
  LogDensity1D d;
  d.log_pdf = [](double y) { return -y - 2.0 * log1p_exp(-y); };
  d.d1 = [](double y) { return -1.0 + 2.0 * logistic_sigma(y); };
  d.d2 = [](double y) {
    double s = logistic_sigma(y);
    return -2.0 * s * (1.0 - s);
  };
  d.d3 = [](double y) {
    double s = logistic_sigma(y);
    return 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
  };
  d.support_lo = -30.0;
  d.support_hi = 30.0;
  return d;
}

LogDensity1D LogDensity1D::invertible_backward_noise() {
  LogDensity1D d;
  d.log_pdf = [](double n) { return -2.0 * n - std::exp(-n); };
  d.d1 = [](double n) { return -2.0 + std::exp(-n); };
  d.d2 = [](double n) { return -std::exp(-n); };
  d.d3 = [](double n) { return std::exp(-n); };
  d.support_lo = -4.0;
  d.support_hi = 30.0;
  return d;
}

LogDensity1D LogDensity1D::from_log_pdf(std::function<double(double)> log_pdf,
                                        double support_lo, double support_hi,
                                        double h) {
  require(support_lo < support_hi, "LogDensity1D: empty support window");
  Fn1D fd = Fn1D::from_function(log_pdf, h);
  LogDensity1D d;
  d.log_pdf = std::move(fd.f);
  d.d1 = std::move(fd.d1);
  d.d2 = std::move(fd.d2);
  d.d3 = std::move(fd.d3);
  d.support_lo = support_lo;
  d.support_hi = support_hi;
  return d;
}

double forward_log_density(double x, double y) {
  // log p_N(y - f(x)) + log p_X(x) with f(x) = -x, both standard Gumbel.
  double n = y + x;
  return (-n - std::exp(-n)) + (-x - std::exp(-x));
}

double backward_log_density(double x, double y) {
  // log p_N~(x - g(y)) + log p_Y(y).
  double n = x - log1p_exp(-y);
  double log_p_noise = -2.0 * n - std::exp(-n);
  double log_p_y = -y - 2.0 * log1p_exp(-y);
  return log_p_noise + log_p_y;
}

Dataset sample_invertible_pair(InvertibleDirection direction, Index n,
                               RngStream& rng) {
  require(n >= 2, "sample_invertible_pair: need n >= 2");
  Vector x(n), y(n);
  if (direction == InvertibleDirection::ForwardLinear) {
    for (Index i = 0; i < n; ++i) {
      double xi = rng.gumbel(0.0, 1.0);
      double ni = rng.gumbel(0.0, 1.0);
      x(i) = xi;
      y(i) = -xi + ni;
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      double u = rng.uniform01();
      double yi = std::log(u / (1.0 - u));  // standard logistic
      double ni = -std::log(rng.gamma(2.0, 1.0));
      y(i) = yi;
      x(i) = log1p_exp(-yi) + ni;
    }
  }
  Dataset d;
  d.values.resize(n, 2);
  d.values.col(0) = standardize(x);
  d.values.col(1) = standardize(y);
  d.label = direction == InvertibleDirection::ForwardLinear ? GraphLabel::XtoY
                                                            : GraphLabel::YtoX;
  d.scm_class = direction == InvertibleDirection::ForwardLinear
                    ? "invertible_forward"
                    : "invertible_backward";
  d.seed = rng.seed();
  return d;
}

ReducedPair post_anm_reduce(const PostAnmSpec& spec) {
  auto check_monotone = [](const Fn1D& fn, const char* name) {
    double prev = fn.f(kGridLo);
    int dir = 0;
    for (int i = 1; i < kMonotoneGridPoints; ++i) {
      double x = kGridLo + (kGridHi - kGridLo) * i / (kMonotoneGridPoints - 1);
      double v = fn.f(x);
      int step = v > prev ? 1 : (v < prev ? -1 : 0);
      if (step == 0 || (dir != 0 && step != dir))
        throw ContractError(std::string("post_anm_reduce: ") + name +
                            " is not strictly monotone on the working grid");
      dir = step;
      prev = v;
    }
  };
  check_monotone(spec.f2, "f2");
  check_monotone(spec.g2, "g2");
  return {compose(spec.f1, spec.g2), compose(spec.g1, spec.f2)};
}

double anm_ode_residual(const Fn1D& f, const LogDensity1D& nu,
                        const LogDensity1D& xi, double x, double y) {
  double n = y - f.f(x);
  double f1 = f.d1(x), f2 = f.d2(x), f3 = f.d3(x);
  double nu1 = nu.d1(n), nu2 = nu.d2(n), nu3 = nu.d3(n);
  if (std::abs(nu2 * f1) < kUndefinedTol)
    throw NumericError("anm_ode_residual: undefined point (nu'' * f' ~ 0)");
  double rhs = xi.d2(x) * (f2 / f1 - nu3 * f1 / nu2) +
               nu3 * nu1 * f2 * f1 / nu2 - nu1 * f2 * f2 / f1 -
               2.0 * nu2 * f2 * f1 + nu1 * f3;
  return xi.d3(x) - rhs;
}

double backward_map_constraint_residual(const PostAnmSpec& spec,
                                        const LogDensity1D& xi,
                                        const LogDensity1D& nu_y, double x,
                                        double y) {
  ReducedPair reduced = post_anm_reduce(spec);
  double n = y - reduced.h_y.f(x);
  double hy1 = reduced.h_y.d1(x), hy2 = reduced.h_y.d2(x);
  double nu1 = nu_y.d1(n), nu2 = nu_y.d2(n);
  if (std::abs(nu2 * hy1) < kUndefinedTol)
    throw NumericError(
        "backward_map_constraint_residual: undefined point (nu_y'' * h_y' ~ 0)");
  double hx1 = reduced.h_x.d1(y);
  if (std::abs(hx1) < kUndefinedTol)
    throw NumericError(
        "backward_map_constraint_residual: h_x' ~ 0 at evaluation point");
  double rhs = (xi.d2(x) + nu2 * hy1 * hy1 - nu1 * hy2) / (nu2 * hy1);
  return 1.0 / hx1 - rhs;
}

namespace {

// Composite Simpson integral of exp(log_pdf) over the support window.
double density_mass(const LogDensity1D& d, int intervals = 20000) {
  double lo = d.support_lo, hi = d.support_hi;
  double h = (hi - lo) / intervals;
  double acc = std::exp(d.log_pdf(lo)) + std::exp(d.log_pdf(hi));
  for (int i = 1; i < intervals; ++i) {
    double w = (i % 2 == 1) ? 4.0 : 2.0;
    acc += w * std::exp(d.log_pdf(lo + i * h));
  }
  return acc * h / 3.0;
}

OracleCheck grid_check(const std::string& name, const std::string& grid,
                       double threshold,
                       const std::function<double(double, double)>& residual,
                       double lo, double hi, int pts) {
  double max_abs = 0.0;
  for (int i = 0; i < pts; ++i) {
    for (int j = 0; j < pts; ++j) {
      double x = lo + (hi - lo) * i / (pts - 1);
      double y = lo + (hi - lo) * j / (pts - 1);
      max_abs = std::max(max_abs, std::abs(residual(x, y)));
    }
  }
  return {name, grid, max_abs, max_abs < threshold};
}

PostAnmSpec invertible_pair_spec() {
  return {fn_negation(), fn_identity(), fn_log1p_exp_neg(), fn_identity()};
}

}  // namespace

std::vector<OracleCheck> run_oracle_checks(const std::string& which) {
  std::string name = which == "example2" ? "invertible_pair" : which;
  std::vector<OracleCheck> out;
  auto want = [&](const char* check) { return name == "all" || name == check; };

  if (want("invertible_pair")) {
    out.push_back(grid_check(
        "invertible_pair", "100x100 over [-5,5]^2", 1e-9,
        [](double x, double y) {
          return forward_log_density(x, y) - backward_log_density(x, y);
        },
        kGridLo, kGridHi, 100));
  }
  if (want("density_normalization")) {
    double worst = 0.0;
    for (const LogDensity1D& d :
         {LogDensity1D::standard_gaussian(), LogDensity1D::standard_gumbel(),
          LogDensity1D::standard_logistic(),
          LogDensity1D::invertible_backward_noise()}) {
      worst = std::max(worst, std::abs(density_mass(d) - 1.0));
    }
    out.push_back({"density_normalization", "Simpson, 20000 intervals", worst,
                   worst < 1e-4});
  }
  if (want("anm_ode_linear_gaussian")) {
    LogDensity1D normal = LogDensity1D::standard_gaussian();
    out.push_back(grid_check(
        "anm_ode_linear_gaussian", "20x20 over [-2,2]^2", 1e-8,
        [&](double x, double y) {
          return anm_ode_residual(fn_identity(), normal, normal, x, y);
        },
        -2.0, 2.0, 20));
  }
  if (want("anm_ode_linear_gumbel")) {
    LogDensity1D gumbel = LogDensity1D::standard_gumbel();
    out.push_back(grid_check(
        "anm_ode_linear_gumbel", "20x20 over [-2,2]^2", 1e-8,
        [&](double x, double y) {
          return anm_ode_residual(fn_negation(), gumbel, gumbel, x, y);
        },
        -2.0, 2.0, 20));
  }
  if (want("anm_ode_cubic_gaussian")) {
    LogDensity1D normal = LogDensity1D::standard_gaussian();
    double res = anm_ode_residual(fn_cube(), normal, normal, 1.0, 0.0);
    // Identifiable triple: the residual must be far from zero. Its exact
    // value at (1,0) is -28 (hand evaluation with Gaussian derivatives).
    out.push_back({"anm_ode_cubic_gaussian", "point (1,0)", std::abs(res),
                   std::abs(res) > 10.0});
  }
  if (want("backward_constraint")) {
    PostAnmSpec spec = invertible_pair_spec();
    LogDensity1D xi = LogDensity1D::standard_gumbel();
    LogDensity1D nu = LogDensity1D::standard_gumbel();
    out.push_back(grid_check(
        "backward_constraint", "20x20 over [-5,5]^2", 1e-6,
        [&](double x, double y) {
          return backward_map_constraint_residual(spec, xi, nu, x, y);
        },
        kGridLo, kGridHi, 20));
  }
  if (out.empty()) throw ConfigError("oracle: unknown check name: " + which);
  return out;
}

}  // namespace cwb
