#include "overq/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace overq {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kLnSqrt2Pi = 0.9189385332046727;
}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_ccdf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double std_normal_log_ccdf(double x) {
  if (x < 30.0) {
    double c = std_normal_ccdf(x);
    if (c > 0.0) return std::log(c);
  }
  // Asymptotic expansion of log(phi(x)/x) with the first Mills correction
  // terms; relative error < 1e-12 for x >= 30.
  double x2 = x * x;
  double corr = std::log1p(-1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2));
  return -0.5 * x2 - kLnSqrt2Pi - std::log(x) + corr;
}

double std_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("std_normal_quantile: u outside (0,1)");
  // Seed: Beasley-Springer/Moro-style rational approximation in the core,
  // asymptotic sqrt(2 ln(1/u)) form in the tails.
  double x;
  if (u > 0.02425 && u < 1.0 - 0.02425) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    double q = u - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double t = (u < 0.5) ? u : 1.0 - u;
    double s = std::sqrt(-2.0 * std::log(t));
    // Two correction terms of the asymptotic inverse.
    double x0 = s - (std::log(s * s) + std::log(2.0 * 3.141592653589793)) / (2.0 * s);
    x = (u < 0.5) ? -x0 : x0;
  }
  // Bracketed Newton on F(x) - u. The cdf is evaluated through erfc on the
  // side that avoids cancellation.
  for (int it = 0; it < 60; ++it) {
    double f;
    if (x <= 0.0) {
      f = std_normal_cdf(x) - u;  // erfc(-x/sqrt2)/2, accurate for x<=0
    } else {
      f = (1.0 - u) - std_normal_ccdf(x);  // Phi(x)-u without upper-tail cancellation
    }
    double d = std_normal_pdf(x);
    if (d <= 0.0) break;
    double step = f / d;
    // Damp absurd steps from the flat tails.
    if (std::fabs(step) > 2.0) step = (step > 0 ? 2.0 : -2.0);
    double xn = x - step;
    if (xn == x) break;
    x = xn;
    if (std::fabs(step) < 1e-14 * (1.0 + std::fabs(x))) break;
  }
  return x;
}

MillsBracket mills_bracket(double a) {
  if (a < 0.0) throw std::domain_error("mills_bracket: a must be >= 0");
  return MillsBracket{105.0 / (91.0 + 110.0 * a), 44.0 / (35.0 + 28.0 * a), a};
}

double gaussian_lp_norm(double p) {
  if (p < 1.0) throw std::domain_error("gaussian_lp_norm: p must be >= 1");
  double logm = 0.5 * p * std::log(2.0) + std::lgamma(0.5 * (p + 1.0)) - 0.5 * std::log(3.141592653589793);
  return std::exp(logm / p);
}

double hermite_lp_bound_log(int k, double p) {
  if (k < 0) throw std::domain_error("hermite_lp_bound: k must be >= 0");
  if (p < 1.0) throw std::domain_error("hermite_lp_bound: p must be >= 1");
  return 0.5 * k * std::log(p) + 0.5 * std::lgamma(static_cast<double>(k) + 1.0);
}

double hermite_lp_bound(int k, double p) { return std::exp(hermite_lp_bound_log(k, p)); }

}  // namespace overq
