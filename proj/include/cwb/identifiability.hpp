#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cwb/common.hpp"
#include "cwb/rng.hpp"
#include "cwb/scm.hpp"

namespace cwb {

// Scalar function bundled with its first three derivatives. Closed-form
// where available; from_function falls back to central differences.
struct Fn1D {
  std::function<double(double)> f;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<double(double)> d3;

  static Fn1D from_function(std::function<double(double)> fn, double h = 1e-4);
};

Fn1D fn_identity();
Fn1D fn_negation();
Fn1D fn_cube();
Fn1D fn_linear(double coef);
// g(y) = log(1 + exp(-y)), the backward mechanism of the invertible pair.
Fn1D fn_log1p_exp_neg();
// Composition a(b(x)) with chain-rule derivatives up to third order.
Fn1D compose(const Fn1D& outer, const Fn1D& inner);

// Log-density with derivatives and a documented support window outside of
// which the remaining mass is < 1e-9 (used by the quadrature checks).
struct LogDensity1D {
  std::function<double(double)> log_pdf;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<double(double)> d3;
  double support_lo = -8.0;
  double support_hi = 8.0;

  static LogDensity1D standard_gaussian();
  static LogDensity1D standard_gumbel();
  // Marginal of the effect in the invertible pair: the standard logistic.
  static LogDensity1D standard_logistic();
  // Noise of the backward factorization: log pdf n -> -2n - exp(-n)
  // (the law of -log G, G ~ Gamma(2,1)).
  static LogDensity1D invertible_backward_noise();
  // User-supplied density; derivatives by central differences with step h.
  static LogDensity1D from_log_pdf(std::function<double(double)> log_pdf,
                                   double support_lo, double support_hi,
                                   double h = 1e-4);
};

// The invertible Gumbel pair: a single joint distribution admitting both a
// forward linear and a backward nonlinear additive-noise factorization.
//   forward:  Y = -X + N,     X, N standard Gumbel
//   backward: X = g(Y) + N~,  g(y) = log(1+exp(-y)), Y standard logistic
enum class InvertibleDirection { ForwardLinear, BackwardNonlinear };

// log p(x,y) via the forward factorization: log p_N(y+x) + log p_X(x).
double forward_log_density(double x, double y);
// log p(x,y) via the backward factorization: log p_N~(x-g(y)) + log p_Y(y).
double backward_log_density(double x, double y);

// Draws n observations through the stated factorization; the two directions
// sample the same joint law but carry opposite labels. Columns standardized.
Dataset sample_invertible_pair(InvertibleDirection direction, Index n, RngStream& rng);

// Post-additive-noise pair: forward Y = f2(f1(X) + N_Y), backward
// X = g2(g1(Y) + N_X); f2 and g2 must be invertible.
struct PostAnmSpec {
  Fn1D f1, f2, g1, g2;
};

struct ReducedPair {
  Fn1D h_y;  // f1 o g2: mechanism of the transformed forward ANM
  Fn1D h_x;  // g1 o f2: mechanism of the transformed backward ANM
};

// Reduction of the post-ANM pair to a plain additive-noise pair on the
// transformed variables. Throws ContractError if f2 or g2 is not strictly
// monotone on the working grid [-5,5].
ReducedPair post_anm_reduce(const PostAnmSpec& spec);

// Residual (LHS - RHS) of the third-order ODE that every non-identifiable
// additive-noise triple (f, p_cause, p_noise) must solve; nonzero residual
// certifies identifiability at that point. xi = log p_cause evaluated at x,
// nu = log p_noise evaluated at y - f(x). Throws NumericError where
// |nu''(y-f(x)) * f'(x)| < 1e-12 (the equation is undefined there).
double anm_ode_residual(const Fn1D& f, const LogDensity1D& nu,
                        const LogDensity1D& xi, double x, double y);

// Residual of the constraint tying the backward mechanism's slope to forward
// quantities when both factorizations hold: 1/h_x'(y) minus
// (xi''(x) + nu_y''*(h_y')^2 - nu_y'*h_y'') / (nu_y''*h_y'), nu_y evaluated
// at y - h_y(x). Same undefined-point guard; h_x'(y) ~ 0 is an error.
double backward_map_constraint_residual(const PostAnmSpec& spec,
                                        const LogDensity1D& xi,
                                        const LogDensity1D& nu_y, double x,
                                        double y);

struct OracleCheck {
  std::string check;
  std::string grid;
  double max_abs_residual = 0.0;
  bool pass = false;
};

// Named residual sweeps backing the `oracle` CLI subcommand. `which` is a
// check name or "all"; "example2" is accepted as an alias for the
// invertible-pair grid check.
std::vector<OracleCheck> run_oracle_checks(const std::string& which);

}  // namespace cwb
