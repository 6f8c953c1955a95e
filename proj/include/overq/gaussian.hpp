#pragma once

namespace overq {

// Standard-normal primitives used by the bounds and the quantile-coupling
// metrics. All functions are pure and thread-safe.

// Density phi(x).
double std_normal_pdf(double x);

// Complementary cdf Phi^c(x). Relative error <= ~1e-15 for |x| <= 8,
// absolute error far below 1e-300 beyond.
double std_normal_ccdf(double x);

// Lower-tail cdf Phi(x).
double std_normal_cdf(double x);

// log Phi^c(x), stable for large positive x (down to x ~ 1e8).
double std_normal_log_ccdf(double x);

// Quantile Phi^{-1}(u), u in (0,1). Bracketed Newton refinement seeded by a
// rational approximation; |Phi(result) - u| <= 1e-12 and relative accuracy on
// the abscissa near machine precision, including u within ~1e-300 of 0 or 1.
// Throws std::domain_error outside (0,1).
double std_normal_quantile(double u);

// Rational two-sided bounds on the scaled Mills ratio
//   105/(91+110a) <= sqrt(2*pi) e^{a^2/2} Phi^c(a) <= 44/(35+28a),  a >= 0.
struct MillsBracket {
  double lower;
  double upper;
  double at;
};
MillsBracket mills_bracket(double a);

// L^p norm of a standard normal: (2^{p/2} Gamma((p+1)/2) / sqrt(pi))^{1/p}.
// Evaluated through lgamma; p >= 1.
double gaussian_lp_norm(double p);

// Upper bound on the L^p norm of the k-th Hermite polynomial of a standard
// normal: ||h_k(Z)||_{L^p} <= sqrt(p)^k sqrt(k!).
double hermite_lp_bound(int k, double p);
double hermite_lp_bound_log(int k, double p);

}  // namespace overq
