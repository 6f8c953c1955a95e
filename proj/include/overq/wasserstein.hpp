#pragma once

#include "overq/ssq_exact.hpp"

namespace overq {

struct WpResult {
  double value = 0.0;
  double p = 1.0;
  double quad_error = 0.0;     // estimated quadrature error on value
  double endpoint_tail = 0.0;  // bound on the contribution excluded near u in {0,1}
};

// W_p between the normalized lattice law ((i - offset) * scale under pmf) and
// N(0,1), through the optimal quantile coupling
//   W_p^p = int_0^1 |F^{-1}(u) - Phi^{-1}(u)|^p du.
// Composite Gauss-Legendre panels split at every cdf breakpoint (and at the
// interior kink where Phi^{-1}(u) crosses the atom), each panel doubled until
// 3-digit stability; the two endpoint slivers where the lattice quantile is
// constant are bounded analytically with incomplete Gaussian moments and both
// sides of that bracket are folded into the reported errors.
WpResult wp_lattice_vs_gaussian(const LatticePmf& pmf, double p);

// Exact W_p between two lattice laws: sum over the merged breakpoints of the
// two quantile staircases.
WpResult wp_lattice_vs_lattice(const LatticePmf& a, const LatticePmf& b, double p);

// Right-hand side of the tail-transfer inequality:
//   |P(X > a) - P(Z > a)| <= (1-rho) a phi(rho a) + [(1-rho) a]^{-p} wp^p.
// rho in [0,1), a > 0. The lower-tail statement |P(X < -a) - P(Z < -a)| is
// bounded by the same right-hand side (derived by symmetry), so one evaluator
// serves both tails.
double tail_sandwich_rhs(double a, double rho, double p, double wp);

// The proof-regime selectors, exposed separately so a harness can reproduce
// each regime explicitly. rho = 1 - e wp / a (floored at 0 when vacuous).
double select_rho(double a, double wp);
double select_p_constant(double a, double gamma);                    // a^2/2 + ln(1/sqrt(gamma))
double select_p_moderate(double a, double d2);                       // a^2 / (2 e^2 D2^2)
double select_p_large(double a, double gamma, double lambda, double d3);

}  // namespace overq
