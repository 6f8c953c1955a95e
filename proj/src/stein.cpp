#include "overq/stein.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "overq/gaussian.hpp"

namespace overq {

namespace {

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// J_k = int_0^1 s^{k-1} (1 + r0^2 s^2)^{-3/2} ds via GL16 with doubling; the
// k >= 3 weight is g_k = e^{t0} ||h_{k-1}||_p r0^k J_k after the x = e^{-t},
// r = x/sqrt(1-x^2) substitutions.
double quad_jk(double r0, int k) {
  static const double glx[16] = {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
      -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
      0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
      0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
  static const double glw[16] = {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
      0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
      0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
  auto f = [&](double s) {
    return std::pow(s, static_cast<double>(k - 1)) * std::pow(1.0 + r0 * r0 * s * s, -1.5);
  };
  double prev = 0.0;
  for (int m = 1; m <= 512; m *= 2) {
    double acc = 0.0, h = 1.0 / m;
    for (int j = 0; j < m; ++j) {
      double mid = (j + 0.5) * h, half = 0.5 * h;
      double a = 0.0;
      for (int q = 0; q < 16; ++q) a += glw[q] * f(mid + half * glx[q]);
      acc += half * a;
    }
    if (m > 1 && std::fabs(acc - prev) <= 1e-12 * std::fabs(acc)) return acc;
    prev = acc;
  }
  return prev;
}

struct SeriesScale {
  double log_r0;      // r0 = x0 / sqrt(1 - x0^2)
  double x0;
};

SeriesScale scale_of(double t0) {
  double x0 = std::exp(-t0);
  double r0 = x0 / std::sqrt(1.0 - x0 * x0);
  return {std::log(r0), x0};
}

}  // namespace

GCoefficients g_coefficients(double t0, double p, int kmax) {
  if (!(t0 > 0.0)) throw std::domain_error("g_coefficients: t0 must be > 0 (g_k diverges at 0)");
  if (!(p > 1.0)) throw std::domain_error("g_coefficients: p must be > 1");
  if (kmax < 3) throw std::domain_error("g_coefficients: kmax must be >= 3");

  GCoefficients out;
  out.t0 = t0;
  out.p = p;
  out.g.resize(kmax + 1);
  const double x0 = std::exp(-t0);
  const double et0 = std::exp(t0);
  const double zp = gaussian_lp_norm(p);
  out.g[0] = et0 * zp * (0.5 * 3.141592653589793 - std::asin(x0));
  out.g[1] = 1.0;
  out.g[2] = et0 * zp * (1.0 - std::sqrt(1.0 - x0 * x0));
  SeriesScale sc = scale_of(t0);
  for (int k = 3; k <= kmax; ++k) {
    double log_gk = t0 + hermite_lp_bound_log(k - 1, p) + k * sc.log_r0 +
                    std::log(quad_jk(std::exp(sc.log_r0), k));
    out.g[k] = std::exp(log_gk);
  }

  // Canonical-envelope remainder: sum_{k>kmax} g_k eta^k / k! with
  // eta = sqrt((1-e^{-2 t0})/p), bounded through g_k <= e^{t0} x0
  // ||h_{k-1}||_p r0^{k-1} and geometric majorization of the term ratio.
  const double log_eta = 0.5 * std::log((1.0 - x0 * x0) / p);
  auto log_term = [&](int k) {
    return t0 + std::log(x0) + hermite_lp_bound_log(k - 1, p) + (k - 1) * sc.log_r0 +
           k * log_eta - std::lgamma(static_cast<double>(k) + 1.0);
  };
  auto log_ratio = [&](int k) {
    // log(term(k+1)/term(k))
    return 0.5 * std::log(p) + 0.5 * std::log(static_cast<double>(k)) -
           std::log(static_cast<double>(k) + 1.0) + sc.log_r0 + log_eta;
  };
  double lr = log_ratio(kmax + 1);
  if (lr < 0.0) {
    out.tail_bound = std::exp(log_term(kmax + 1) - std::log1p(-std::exp(lr)));
  } else {
    out.tail_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

double km_coefficient(const QueueParams& params, KmModel model, int k,
                      std::span<const std::int64_t> state) {
  if (k < 1) throw std::domain_error("km_coefficient: k must be >= 1");
  const double lam = params.lambda, g = params.gamma;
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  double death = 0.0;
  if (model == KmModel::kSsq) {
    if (state.size() != 1) throw std::invalid_argument("km_coefficient: ssq state is scalar");
    if (state[0] >= 1) death = params.mus[0] + g * static_cast<double>(state[0]);
  } else {
    if (static_cast<int>(state.size()) != params.n())
      throw std::invalid_argument("km_coefficient: state dimension mismatch");
    for (int i = 0; i < params.n(); ++i) {
      death += (state[i] != 0 ? params.mus[i] : 0.0) + g * static_cast<double>(state[i]);
    }
  }
  double log_pref = -std::lgamma(static_cast<double>(k) + 1.0) - std::log(g) +
                    0.5 * k * std::log(g / lam);
  return std::exp(log_pref) * (lam + sign * death);
}

namespace {

// Shared assembly once the exact L^p sums of the coefficient deviations are
// available. log_norm(k) must return log || a_k + T(X) ||_p for k == 1,
// log || a_k - 1 ||_p for k == 2 and log || a_k ||_p for k >= 3; log_m is
// log(lambda + mu + gamma ||sum q||_p), the affine envelope for the tail.
template <class NormFn>
BoundReport assemble_certificate(const QueueParams& params, double p, std::optional<double> t0_opt,
                                 int kmax, const NormFn& log_norm, double log_m) {
  if (!(p > 1.0)) throw std::domain_error("certificate_bound: p must be > 1");
  if (kmax < 3) throw std::domain_error("certificate_bound: kmax must be >= 3");
  const double lam = params.lambda, g = params.gamma;
  double t0;
  if (t0_opt) {
    t0 = *t0_opt;
    if (!(t0 > 0.0)) throw std::domain_error("certificate_bound: t0 must be > 0");
  } else {
    if (!(p * g / lam < 1.0))
      throw std::domain_error(
          "certificate_bound: default t0 undefined for p*gamma/lambda >= 1; supply t0");
    t0 = -0.5 * std::log1p(-p * g / lam);
  }
  GCoefficients gc = g_coefficients(t0, p, kmax);

  BoundReport r;
  double log_total = std::log(gc.g[0]);
  r.aux["term_g0"] = gc.g[0];
  {
    double lt = log_norm(1);  // g1 = 1
    r.aux["term_k1"] = std::exp(lt);
    log_total = logaddexp(log_total, lt);
  }
  {
    double lt = std::log(gc.g[2]) + log_norm(2);
    r.aux["term_k2"] = std::exp(lt);
    log_total = logaddexp(log_total, lt);
  }
  for (int k = 3; k <= kmax; ++k) {
    double lt = std::log(gc.g[k]) + log_norm(k);
    if (k <= 6) r.aux["term_k" + std::to_string(k)] = std::exp(lt);
    log_total = logaddexp(log_total, lt);
  }

  // Truncation remainder at the model's actual envelope
  // ||a_k||_p <= (M/gamma) (gamma/lambda)^{k/2} / k!.
  SeriesScale sc = scale_of(t0);
  auto log_term_env = [&](int k) {
    return t0 + std::log(sc.x0) + hermite_lp_bound_log(k - 1, p) + (k - 1) * sc.log_r0 +
           0.5 * k * std::log(g / lam) - std::lgamma(static_cast<double>(k) + 1.0) - std::log(g) +
           log_m;
  };
  double lr = 0.5 * std::log(p) + 0.5 * std::log(static_cast<double>(kmax + 1)) -
              std::log(static_cast<double>(kmax + 2)) + sc.log_r0 + 0.5 * std::log(g / lam);
  double tail;
  if (lr < 0.0) {
    tail = std::exp(log_term_env(kmax + 1) - std::log1p(-std::exp(lr)));
  } else {
    tail = std::numeric_limits<double>::infinity();
  }
  log_total = logaddexp(log_total, std::log(tail));

  r.set_upper_log(log_total);
  r.set_lower(0.0);
  r.aux["truncation_tail"] = tail;
  r.aux["t0"] = t0;
  r.aux["kmax"] = static_cast<double>(kmax);
  r.aux["p"] = p;
  r.aux["g_tail_bound_canonical"] = gc.tail_bound;
  r.preconditions["p_gamma_over_lambda"] = p * g / lam;
  r.preconditions["tail_finite"] = std::isfinite(tail) ? 1.0 : 0.0;
  r.valid = std::isfinite(tail);
  return r;
}

}  // namespace

BoundReport certificate_bound(const QueueParams& params, double p, std::optional<double> t0,
                              int kmax, const LatticePmf& pmf) {
  if (params.n() != 1) throw std::invalid_argument("certificate_bound: ssq overload needs n == 1");
  const double lam = params.lambda, g = params.gamma;
  auto log_norm = [&](int k) {
    // exact L^p sum of the k-th coefficient deviation over the support
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(pmf.size(), -std::numeric_limits<double>::infinity());
    std::int64_t st[1];
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      st[0] = static_cast<std::int64_t>(i);
      double dev = km_coefficient(params, KmModel::kSsq, k, st);
      if (k == 1) dev += pmf.normalized_value(i);
      if (k == 2) dev -= 1.0;
      if (dev == 0.0) continue;
      terms[i] = pmf.log_probs[i] + p * std::log(std::fabs(dev));
      m = std::max(m, terms[i]);
    }
    if (!std::isfinite(m)) return -std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return (m + std::log(s)) / p;
  };
  double log_m = std::log(lam + params.mu() + g * moment_lp(pmf, 0.0, p));
  return assemble_certificate(params, p, t0, kmax, log_norm, log_m);
}

BoundReport certificate_bound_jsq(const QueueParams& params, double p, std::optional<double> t0,
                                  int kmax, const JointPmf& pmf) {
  const double lam = params.lambda, g = params.gamma;
  const double offset = (lam - params.mu()) / g;
  const double scale = std::sqrt(g / lam);
  auto log_norm = [&](int k) {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(pmf.size(), -std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> st;
    for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
      if (pmf.log_probs[idx] == -std::numeric_limits<double>::infinity()) continue;
      pmf.state_of(idx, st);
      double dev = km_coefficient(params, KmModel::kJsqSum, k, st);
      if (k == 1) {
        double qsum = 0.0;
        for (auto v : st) qsum += static_cast<double>(v);
        dev += (qsum - offset) * scale;
      }
      if (k == 2) dev -= 1.0;
      if (dev == 0.0) continue;
      terms[idx] = pmf.log_probs[idx] + p * std::log(std::fabs(dev));
      m = std::max(m, terms[idx]);
    }
    if (!std::isfinite(m)) return -std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return (m + std::log(s)) / p;
  };
  double log_m = std::log(lam + params.mu() + g * joint_qsum_hat_lp(params, pmf, p) +
                          g * ((lam - params.mu()) / g));
  return assemble_certificate(params, p, t0, kmax, log_norm, log_m);
}

}  // namespace overq
