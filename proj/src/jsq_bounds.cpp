#include "overq/jsq_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "overq/gaussian.hpp"

namespace overq {

namespace {
const double kE = 2.718281828459045;
const double kSqrt2Pi = std::sqrt(2.0 * 3.141592653589793);

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

bool overload_ok(const QueueParams& p) {
  return p.lambda / p.mu() - 1.0 >= p.C * std::pow(p.gamma / p.mu(), p.alpha);
}

double dot_ones(std::span<const double> phi) {
  double d = 0.0;
  for (double v : phi) d += v;
  return d;
}

void require_unit(std::span<const double> phi) {
  double norm = 0.0;
  for (double v : phi) norm += v * v;
  if (std::fabs(std::sqrt(norm) - 1.0) > 1e-12)
    throw std::invalid_argument("jsq_tail_bounds: phi must have unit norm");
}
}  // namespace

BoundReport ssc_bound(const QueueParams& params, double p) {
  return ssc_bound(params, jsq_constants(params), p);
}

BoundReport ssc_bound(const QueueParams& params, const ConstantTable& t, double p) {
  if (p < 1.0) throw std::domain_error("ssc_bound: p must be >= 1");
  BoundReport r;
  const double logp = std::log(p);
  double log_u = std::max(t.log_value("e1") + 2.0 * logp, t.log_value("e2") + logp);
  r.set_upper_log(log_u);
  r.set_lower(0.0);
  r.aux["p"] = p;
  r.aux["log_upper_e_p2"] = t.log_value("e_ssc") + 2.0 * logp;
  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.valid = overload_ok(params);
  for (const char* k : {"e1", "e2", "e_ssc"}) r.constants_used[k] = t.log_value(k);
  return r;
}

ZeroMassBounds zero_mass_bounds(const QueueParams& params) {
  return zero_mass_bounds(params, jsq_constants(params));
}

ZeroMassBounds zero_mass_bounds(const QueueParams& params, const ConstantTable& t) {
  const double lam = params.lambda, mu = params.mu(), g = params.gamma;
  const double n = params.n(), C = params.C;
  ZeroMassBounds out;

  // theta-range condition behind the drift bound: sqrt(gamma) C / lambda <= ln(lambda/mu)
  const bool theta_ok = std::sqrt(g) * C / lam <= std::log(lam / mu);

  out.sum_zero.set_upper_log(-(C / (2.0 * n * lam)) * (lam - mu) / std::sqrt(g));
  out.sum_zero.set_lower(0.0);
  out.sum_zero.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  out.sum_zero.preconditions["theta_range_ok"] = theta_ok ? 1.0 : 0.0;
  out.sum_zero.valid = overload_ok(params) && theta_ok;

  out.all_zero.set_lower_log(-lam / g);
  out.all_zero.set_upper_log(t.log_value("c_prime") + 0.5 * std::log(g / mu) -
                             (lam / mu - 1.0 - std::log(lam / mu)) * (mu / g));
  out.all_zero.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  out.all_zero.preconditions["C_gt_1"] = params.C > 1.0 ? 1.0 : 0.0;
  out.all_zero.valid = overload_ok(params);
  out.all_zero.constants_used["c_prime"] = t.log_value("c_prime");
  return out;
}

BoundReport qsum_moment_bounds(const QueueParams& params, double p) {
  return qsum_moment_bounds(params, jsq_constants(params), p);
}

BoundReport qsum_moment_bounds(const QueueParams& params, const ConstantTable& t, double p) {
  if (p < 1.0) throw std::domain_error("qsum_moment_bounds: p must be >= 1");
  const double lam = params.lambda, g = params.gamma;
  const double n = params.n();
  BoundReport r;
  const double sub_expo = t.value("c_jsq_pprime") * std::sqrt(p) / std::sqrt(g) +
                          t.value("c_jsq_prime") * p;
  const double sub_poisson =
      n * (t.value("a_jsq_mgf") + 1.0 / n) * p / std::log1p(n * g * p / lam);
  r.set_upper(std::max(sub_expo, sub_poisson));
  const double log_lower = t.log_value("c4") -
                           8.0 * (15.0 + t.value("a_mgf")) * lam / (g * p) + std::log(p) -
                           std::log(std::log1p(p * g / lam));
  r.set_lower_log(log_lower);
  r.aux["p"] = p;
  r.aux["upper_sub_exponential"] = sub_expo;
  r.aux["upper_sub_poisson"] = sub_poisson;
  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.valid = overload_ok(params);
  for (const char* k : {"a_jsq_mgf", "c_jsq_prime", "c_jsq_pprime", "c4", "a_mgf"})
    r.constants_used[k] = t.log_value(k);
  return r;
}

BoundReport wp_jsq_bounds(const QueueParams& params, double p) {
  return wp_jsq_bounds(params, jsq_constants(params), p);
}

BoundReport wp_jsq_bounds(const QueueParams& params, const ConstantTable& t, double p) {
  if (!(p > 1.0)) throw std::domain_error("wp_jsq_bounds: p must be > 1");
  const double lam = params.lambda, g = params.gamma;
  const double n = params.n();
  const double logp = std::log(p), logg = std::log(g);
  BoundReport r;

  const double log_t1 = -(0.5 - params.alpha - params.epsilon) * logg;  // gamma^{-delta'}
  const double log_t2 = -(0.5 - params.alpha) * logg;
  const double log_t3 = -logg;  // 1/gamma
  const bool in1 = logp <= log_t1;
  const bool in2 = logp >= log_t2 && logp < log_t3;
  const bool in3 = logp >= log_t3;

  const double log_e = t.log_value("e_wp");
  const double log_u1 = log_e + logp + 0.5 * logg;
  const double log_u2 = log_e + 0.5 * logp;
  const double log_u3 = log_e + logp + 0.5 * logg - std::log(std::log1p(n * g * p / lam));
  if (in1) {
    r.regime = Regime::kWp1;
    r.set_upper_log(log_u1);
  } else if (in3) {
    r.regime = Regime::kWp3;
    r.set_upper_log(log_u3);
  } else if (in2) {
    r.regime = Regime::kWp2;
    r.set_upper_log(log_u2);
  } else {
    r.regime = Regime::kNone;
    r.set_upper_log(std::min({log_u1, log_u2, log_u3}));
  }

  const double log_t_lower = t.log_value("d5") - logg;
  if (logp <= log_t_lower) {
    r.set_lower_log(t.log_value("c_ot_prime") + 0.5 * logg - lam / (p * g));
    r.aux["lower_branch"] = 1.0;
  } else {
    r.set_lower_log(t.log_value("d4p") + logp + 0.5 * logg - std::log(std::log1p(g * p / lam)));
    r.aux["lower_branch"] = 2.0;
  }

  r.aux["p"] = p;
  r.aux["log_upper_wp1"] = log_u1;
  r.aux["log_upper_wp2"] = log_u2;
  r.aux["log_upper_wp3"] = log_u3;
  r.aux["member_wp1"] = in1 ? 1.0 : 0.0;
  r.aux["member_wp2"] = in2 ? 1.0 : 0.0;
  r.aux["member_wp3"] = in3 ? 1.0 : 0.0;
  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.preconditions["gamma_le_gamma1"] = params.gamma <= t.value("gamma1") ? 1.0 : 0.0;
  r.valid = overload_ok(params) && params.gamma <= t.value("gamma1") && r.regime != Regime::kNone;
  for (const char* k : {"e_wp", "c_ot_prime", "d4p", "d5"}) r.constants_used[k] = t.log_value(k);
  return r;
}

BoundReport jsq_tail_bounds(const QueueParams& params, std::span<const double> phi, double a) {
  return jsq_tail_bounds(params, jsq_constants(params), phi, a);
}

BoundReport jsq_tail_bounds(const QueueParams& params, const ConstantTable& t,
                            std::span<const double> phi, double a) {
  require_unit(phi);
  if (static_cast<int>(phi.size()) != params.n())
    throw std::invalid_argument("jsq_tail_bounds: phi dimension mismatch");
  const double lam = params.lambda, mu = params.mu(), g = params.gamma;
  const double n = params.n();
  const double dot = dot_ones(phi);
  const double iota = t.value("iota");
  const double b1 = t.value("b1");
  // direction-specific admissibility threshold gamma_2(phi)
  double log_gamma2 = t.log_value("gamma1");
  if (std::fabs(dot) >= 1e-12) {
    log_gamma2 = std::min(
        log_gamma2, (2.0 / iota) * std::min(std::log(dot * dot),
                                            std::log(0.5) + (1.0 / 3.0) * (4.0 * std::log(std::fabs(dot)) -
                                                                           1.0 - std::log(b1))));
  }
  const bool gamma2_ok = params.gamma <= std::exp(log_gamma2);
  BoundReport r;
  r.aux["a"] = a;
  r.aux["dot_phi_1"] = dot;
  r.aux["log_gamma2_phi"] = log_gamma2;

  if (std::fabs(dot) < 1e-12) {
    // orthogonal direction: pure sub-Weibull case
    const double g_worst = t.value("g_worst");
    r.set_upper_log(-g_worst * std::sqrt(a) / std::pow(g, 0.25));
    r.set_lower(0.0);
    r.regime = Regime::kLarge;
    r.aux["orthogonal"] = 1.0;
    r.aux["lower_open"] = 1.0;
    const bool range_ok = a >= t.value("e_tail_2u") * std::sqrt(g);
    r.preconditions["range_ok"] = range_ok ? 1.0 : 0.0;
    r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
    r.preconditions["gamma_le_gamma2"] = gamma2_ok ? 1.0 : 0.0;
    r.valid = range_ok && overload_ok(params) && gamma2_ok;
    r.constants_used["g_worst"] = t.log_value("g_worst");
    return r;
  }

  // reference Gaussian tail P(Z <phi,1> > a)
  const double z = a / dot;
  const double gauss_ref = (dot > 0.0) ? std_normal_ccdf(z) : std_normal_cdf(z);
  const double log_gauss_ref = std::log(std::max(gauss_ref, 1e-320));
  const double dot2 = dot * dot;
  const double lg_half = std::log(1.0 / std::sqrt(g));
  const double bracket = std::pow(a * a / (2.0 * dot2) + lg_half, 2.0) + kSqrt2Pi;

  // case (a): constant-deviation band
  const double log_err_a = 3.0 + std::log(b1 / (kSqrt2Pi * std::fabs(dot))) + 0.5 * std::log(g) +
                           std::log(bracket) - a * a / (2.0 * dot2);
  // case (b): moderate band with the bracketed exponent correction
  const double corr = kE * b1 * (std::pow(a, 4.0) / (2.0 * dot2 * dot2) * std::sqrt(g) +
                                 2.0 * std::sqrt(g) * lg_half * lg_half / a);
  const double log_err_b = 1.0 + std::log(b1 / (kSqrt2Pi * std::fabs(dot))) + 0.5 * std::log(g) +
                           std::log(bracket) - a * a / (2.0 * dot2) * (1.0 - corr);
  // case (c): sub-Weibull transition; delta recovered from a
  const double delta = std::log(a) / std::log(1.0 / g);
  const double expo = std::min(1.0 / (4.0 * std::max(delta, 1e-300)) + 0.5, 2.0);
  const double c_sub = t.value("c_subweibull");
  const double log_upper_c =
      logaddexp(log_gauss_ref,
                logaddexp(std::log(kE / (2.0 * kSqrt2Pi) * a) - a * a / 8.0,
                          -c_sub * std::pow(a, expo)));

  // nonnegative-direction refinement (Poisson-type), when applicable
  bool phi_nonneg = true;
  for (double v : phi) phi_nonneg = phi_nonneg && v >= 0.0;
  const bool refine_range = a >= kE * kE * n * std::sqrt(lam) / std::sqrt(g);
  double log_refine = std::numeric_limits<double>::infinity();
  if (phi_nonneg && refine_range) {
    const double bb = a * std::sqrt(lam) / (2.0 * n * std::sqrt(g) * dot) + (lam - mu) / (n * g);
    const double arg = a * std::sqrt(g) / (n * std::sqrt(lam) * dot) +
                       (lam - mu) / (n * std::sqrt(lam * g));
    log_refine = -bb * std::log(arg);
    r.aux["log_refinement"] = log_refine;
  }

  // classification: the (b) window is [2, E_tail_1u(phi) gamma^{-iota/2}]
  const double e_tail_1u_phi = std::min(2.0 * dot2, std::pow(std::pow(dot, 4.0) / (kE * b1), 1.0 / 3.0));
  const bool in_b = a >= 2.0 && std::log(a) <= std::log(e_tail_1u_phi) + 0.5 * iota * std::log(1.0 / g);

  double log_gamma_a = std::min(
      {log_gamma2, std::log(std::pow(dot, 8.0) / (kE * kE * b1 * b1)) - 6.0 * std::log(a),
       (1.0 / iota) * std::log(dot2 / (a * a)), 4.0 * std::log(a / (64.0 * kE * b1)),
       std::log(4.0 * std::pow(dot, 12.0) / (kE * kE * b1 * b1)) - 10.0 * std::log(a),
       std::log(std::pow(dot, 8.0)) - (std::log(1048576.0) + 4.0 + 4.0 * std::log(b1)) -
           4.0 * std::log(a)});
  r.aux["log_gamma_a"] = log_gamma_a;

  bool range_ok;
  if (in_b) {
    r.regime = Regime::kNearConstant;
    r.set_upper(gauss_ref + std::exp(log_err_b));
    r.set_lower(gauss_ref - std::exp(log_err_b));
    range_ok = true;
  } else if (a >= 2.0) {
    r.regime = Regime::kLarge;
    double log_u = log_upper_c;
    if (std::isfinite(log_refine)) log_u = std::min(log_u, log_refine);
    r.set_upper_log(log_u);
    r.set_lower(0.0);
    r.aux["lower_open"] = 1.0;
    range_ok = true;
  } else {
    r.regime = Regime::kConstantDev;
    r.set_upper(gauss_ref + std::exp(log_err_a));
    r.set_lower(gauss_ref - std::exp(log_err_a));
    range_ok = params.gamma <= std::exp(log_gamma_a);
  }

  r.aux["gaussian_ref"] = gauss_ref;
  r.aux["log_err_constant"] = log_err_a;
  r.aux["log_err_near_constant"] = log_err_b;
  r.aux["log_upper_subweibull"] = log_upper_c;
  r.aux["delta_from_a"] = delta;
  r.aux["subweibull_exponent"] = expo;
  r.aux["e_tail_1u_phi"] = e_tail_1u_phi;
  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.preconditions["gamma_le_gamma2"] = gamma2_ok ? 1.0 : 0.0;
  r.preconditions["range_ok"] = range_ok ? 1.0 : 0.0;
  r.valid = overload_ok(params) && gamma2_ok && range_ok;
  for (const char* k : {"b1", "b2", "iota", "c_subweibull"}) r.constants_used[k] = t.log_value(k);
  return r;
}

BoundReport jsq_tail_bounds_delta(const QueueParams& params, std::span<const double> phi,
                                  double delta) {
  return jsq_tail_bounds(params, phi, std::pow(params.gamma, -delta));
}

}  // namespace overq
