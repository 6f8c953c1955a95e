#include "overq/ssq_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "overq/gaussian.hpp"
#include "overq/wasserstein.hpp"

namespace overq {

namespace {
const double kE = 2.718281828459045;

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

bool overload_ok(const QueueParams& p) {
  return p.lambda / p.mu() - 1.0 >= p.C * std::pow(p.gamma / p.mu(), p.alpha);
}
}  // namespace

BoundReport p0_bounds(const QueueParams& params) {
  return p0_bounds(params, ssq_constants(params));
}

BoundReport p0_bounds(const QueueParams& params, const ConstantTable& t) {
  const double lam = params.lambda, mu = params.mu(), g = params.gamma;
  BoundReport r;
  const double expo = (lam / mu - 1.0 - std::log(lam / mu)) * (mu / g);
  const double base = 0.5 * std::log(g / mu) - expo;
  r.set_lower_log(t.log_value("d_prime") + base);
  r.set_upper_log(t.log_value("c_prime") + base);
  r.regime = Regime::kConstantDev;
  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.preconditions["C_gt_1"] = params.C > 1.0 ? 1.0 : 0.0;
  r.preconditions["gamma_le_mu"] = params.gamma <= mu ? 1.0 : 0.0;
  r.valid = overload_ok(params) && params.C > 1.0 && params.gamma <= mu;
  r.constants_used["c_prime"] = t.log_value("c_prime");
  r.constants_used["d_prime"] = t.log_value("d_prime");
  r.aux["exponent"] = expo;
  return r;
}

BoundReport lp_norm_bounds(const QueueParams& params, double p) {
  return lp_norm_bounds(params, ssq_constants(params), p);
}

BoundReport lp_norm_bounds(const QueueParams& params, const ConstantTable& t, double p) {
  if (p < 1.0) throw std::domain_error("lp_norm_bounds: p must be >= 1");
  const double lam = params.lambda, g = params.gamma;
  BoundReport r;
  const double sub_expo = t.value("c1") * std::sqrt(1.0 / g) * std::sqrt(p) + t.value("c2") * p;
  const double log_sub_poisson = t.log_value("c3") + std::log(p) - std::log(std::log1p(g * p / lam));
  const double log_upper = std::min(std::log(sub_expo), log_sub_poisson);
  const double log_lower = t.log_value("c4") - t.value("c5") / (g * p) + std::log(p) -
                           std::log(std::log1p(g * p / lam));
  r.set_upper_log(log_upper);
  r.set_lower_log(log_lower);
  r.regime = Regime::kNone;
  r.aux["upper_sub_exponential"] = sub_expo;
  r.aux["log_upper_sub_poisson"] = log_sub_poisson;
  r.aux["p"] = p;
  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.preconditions["gamma_le_gamma0"] = params.gamma <= t.value("gamma0") ? 1.0 : 0.0;
  r.valid = overload_ok(params) && params.gamma <= t.value("gamma0");
  for (const char* k : {"c1", "c2", "c3", "c4", "c5"}) r.constants_used[k] = t.log_value(k);
  return r;
}

BoundReport mgf_envelope(const QueueParams& params, double theta) {
  return mgf_envelope(params, ssq_constants(params), theta);
}

BoundReport mgf_envelope(const QueueParams& params, const ConstantTable& t, double theta) {
  if (theta < 0.0) throw std::domain_error("mgf_envelope: theta must be >= 0");
  const double b = params.lambda / params.gamma;
  BoundReport r;
  const double log_lower = b * (std::exp(theta) - 1.0 - theta);
  r.set_lower_log(log_lower);
  r.set_upper_log(log_lower + t.log_value("a_mgf"));
  r.aux["theta"] = theta;
  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.preconditions["gamma_le_gamma0"] = params.gamma <= t.value("gamma0") ? 1.0 : 0.0;
  r.valid = overload_ok(params) && params.gamma <= t.value("gamma0");
  r.constants_used["a_mgf"] = t.log_value("a_mgf");
  return r;
}

BoundReport wp_bounds(const QueueParams& params, double p) {
  return wp_bounds(params, ssq_constants(params), p);
}

BoundReport wp_bounds(const QueueParams& params, const ConstantTable& t, double p) {
  if (!(p > 1.0)) throw std::domain_error("wp_bounds: p must be > 1");
  const double lam = params.lambda, g = params.gamma;
  const double logp = std::log(p), logg = std::log(g);
  BoundReport r;

  // regime thresholds, compared in log space
  const double log_t1 = -(1.0 - 2.0 * params.alpha - 2.0 * params.epsilon) * logg;
  const double log_t2 = -(1.0 - 2.0 * params.alpha) * logg;
  const double log_t3 = t.log_value("d4") - logg;  // D4/gamma
  const bool in1 = logp <= log_t1;
  const bool in2 = logp > log_t2 && logp < log_t3;
  const bool in3 = logp >= log_t3;

  const double log_u1 = t.log_value("d1") + logp + 0.5 * logg;
  const double log_u2 = t.log_value("d2") + 0.5 * logp;
  const double log_u3 = t.log_value("d3") + logp + 0.5 * logg - std::log(std::log1p(g * p / lam));

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
    // gap between t1 and min(t2, t3): no certified branch; report the min of
    // the formulas with valid = false
    r.regime = Regime::kNone;
    r.set_upper_log(std::min({log_u1, log_u2, log_u3}));
  }

  const double mu = params.mu();
  const double log_t_lower = t.log_value("d5") - logg;  // D5/gamma
  double log_lower;
  if (logp < log_t_lower) {
    log_lower = t.log_value("c7p") + logg - (lam / mu - std::log(lam / mu) - 1.0) / (p * g / mu);
    r.aux["lower_branch"] = 1.0;
  } else {
    log_lower = t.log_value("d4p") + logp + 0.5 * logg - std::log(std::log1p(g * p / lam));
    r.aux["lower_branch"] = 2.0;
  }
  r.set_lower_log(log_lower);

  r.aux["p"] = p;
  r.aux["log_upper_wp1"] = log_u1;
  r.aux["log_upper_wp2"] = log_u2;
  r.aux["log_upper_wp3"] = log_u3;
  r.aux["log_threshold_1"] = log_t1;
  r.aux["log_threshold_2"] = log_t2;
  r.aux["log_threshold_3"] = log_t3;
  r.aux["member_wp1"] = in1 ? 1.0 : 0.0;
  r.aux["member_wp2"] = in2 ? 1.0 : 0.0;
  r.aux["member_wp3"] = in3 ? 1.0 : 0.0;
  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.preconditions["gamma_le_gamma0"] = params.gamma <= t.value("gamma0") ? 1.0 : 0.0;
  r.valid = overload_ok(params) && params.gamma <= t.value("gamma0") && r.regime != Regime::kNone;
  for (const char* k : {"d1", "d2", "d3", "d4", "d5", "d4p", "c7p"}) r.constants_used[k] = t.log_value(k);
  return r;
}

double transform_upper_log(const QueueParams& params, const ConstantTable& t, double a) {
  const double b = params.lambda / params.gamma;
  const double ap = a * std::sqrt(params.lambda / params.gamma);
  return t.log_value("a_mgf") + ap - (b + ap) * std::log1p(ap / b);
}

double transform_upper_optimized_log(const QueueParams& params, const ConstantTable& t, double a) {
  const double b = params.lambda / params.gamma;
  const double ap = a * std::sqrt(params.lambda / params.gamma);
  auto objective = [&](double theta) { return b * (std::exp(theta) - 1.0 - theta) - theta * ap; };
  // golden-section over theta in [0, hi]
  double lo = 0.0, hi = 2.0 * std::log1p(ap / b) + 1.0;
  const double gr = 0.6180339887498949;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    if (objective(c) < objective(d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
    if (hi - lo < 1e-13 * (1.0 + hi)) break;
  }
  double theta = 0.5 * (lo + hi);
  return t.log_value("a_mgf") + objective(theta);
}

BoundReport tail_bounds(const QueueParams& params, double a) {
  return tail_bounds(params, ssq_constants(params), a);
}

BoundReport tail_bounds(const QueueParams& params, const ConstantTable& t, double a) {
  if (!(a > 0.0)) throw std::domain_error("tail_bounds: a must be > 0");
  const double lam = params.lambda, g = params.gamma;
  const double b = lam / g;
  const double ap = a * std::sqrt(lam / g);  // raw deviation
  const double tri = 8.0 * std::sqrt(ap + b);
  const double ln_inv_sqrt_g = std::log(1.0 / std::sqrt(g));
  const double d1 = t.value("d1"), d2 = t.value("d2"), d3 = t.value("d3");

  BoundReport r;
  const double log_phic = std_normal_log_ccdf(a);
  const double phic = std::exp(log_phic);

  // (a) constant-deviation band
  const double log_band_a = t.log_value("d1p_tail") + 0.5 * std::log(g) +
                            std::log(ln_inv_sqrt_g + 0.5 * a * a) - 0.5 * a * a;
  // (b) near-constant band
  const double corr_b = d1 * std::sqrt(g) * (ln_inv_sqrt_g + 0.5 * a * a) / a;
  const double log_band_b = logaddexp(std::log(kE * d1 / std::sqrt(2.0 * 3.141592653589793)) +
                                          0.5 * std::log(g) + std::log(ln_inv_sqrt_g + 0.5 * a * a) -
                                          0.5 * a * a * (1.0 - corr_b),
                                      0.5 * std::log(g) - 0.5 * a * a);
  // (c)/(d) Wasserstein-route uppers
  const double log_c_extra = logaddexp(
      std::log(kE / (2.0 * std::sqrt(3.141592653589793)) * a) -
          0.5 * a * a * std::pow(1.0 - std::sqrt(0.5), 2.0),
      -a * a / (2.0 * kE * kE * d2 * d2));
  const double log_upper_c_wass = logaddexp(log_phic, log_c_extra);
  const double log_d_extra = logaddexp(
      std::log(kE / (2.0 * std::sqrt(2.0 * 3.141592653589793)) * a) - a * a / 8.0,
      -select_p_large(a, g, lam, d3));
  const double log_upper_d_wass = logaddexp(log_phic, log_d_extra);
  // transform-route upper, shared by (c)/(d)
  const double log_upper_tr = transform_upper_log(params, t, a);

  // lower bounds: moderate (Gaussian-corrected) and large (Poisson) forms
  const double theta_star = std::log1p((ap + 0.5 * tri) / b);
  const double log_l2 = std::log(2.0 / 3.0) - 0.5 * a * a + tri * theta_star +
                        tri * tri / (8.0 * b) - std::pow(ap + 0.5 * tri, 3.0) / (3.0 * b * b);
  const double log_l4 = std::log(2.0 / 3.0) - (ap + tri + b) * theta_star + ap + 0.5 * tri;

  // classification against the D_Tail endpoints
  const double d2l = t.value("d_tail_2l");
  const double log_b_hi = t.log_value("d_tail_2u") + (0.5 - params.alpha - params.epsilon) * std::log(1.0 / g);
  const double log_c_lo = t.log_value("d_tail_3l") + (0.5 - params.alpha) * std::log(1.0 / g);
  const double log_c_hi = t.log_value("d_tail_3u") + 0.5 * std::log(1.0 / g);
  const double log_d_lo = t.log_value("d_tail_4l") + 0.5 * std::log(1.0 / g);
  const double la = std::log(a);
  const bool in_b = a >= d2l && la <= log_b_hi;
  const bool in_c = la >= log_c_lo && la <= log_c_hi;
  const bool in_d = la >= log_d_lo;

  double log_gamma_a_v = log_gamma_a(params, t, a);
  bool range_ok = false;
  if (in_d) {
    r.regime = Regime::kLarge;
    r.set_upper_log(std::min(log_upper_d_wass, log_upper_tr));
    r.set_lower_log(log_l4);
    range_ok = true;
  } else if (in_c) {
    r.regime = Regime::kModerate;
    r.set_upper_log(std::min(log_upper_c_wass, log_upper_tr));
    r.set_lower_log(log_l2);
    range_ok = true;
  } else if (in_b) {
    r.regime = Regime::kNearConstant;
    r.set_upper_log(logaddexp(log_phic, log_band_b));
    double lo_band = phic - std::exp(log_band_b);
    r.set_lower(std::max(lo_band, std::exp(log_l2)));
    range_ok = true;
  } else {
    r.regime = Regime::kConstantDev;
    r.set_upper_log(logaddexp(log_phic, log_band_a));
    r.set_lower(phic - std::exp(log_band_a));
    range_ok = params.gamma <= std::exp(log_gamma_a_v);
  }

  r.preconditions["overload_ok"] = overload_ok(params) ? 1.0 : 0.0;
  r.preconditions["gamma_le_gamma0"] = params.gamma <= t.value("gamma0") ? 1.0 : 0.0;
  r.preconditions["range_ok"] = range_ok ? 1.0 : 0.0;
  r.valid = overload_ok(params) && params.gamma <= t.value("gamma0") && range_ok;

  r.aux["a"] = a;
  r.aux["a_raw"] = ap;
  r.aux["delta_shift"] = tri;
  r.aux["theta_star"] = theta_star;
  r.aux["phic"] = phic;
  r.aux["log_band_constant"] = log_band_a;
  r.aux["log_band_near_constant"] = log_band_b;
  r.aux["log_upper_wass_moderate"] = log_upper_c_wass;
  r.aux["log_upper_wass_large"] = log_upper_d_wass;
  r.aux["log_upper_transform"] = log_upper_tr;
  r.aux["log_lower_moderate"] = log_l2;
  r.aux["log_lower_large"] = log_l4;
  r.aux["log_gamma_a"] = log_gamma_a_v;
  r.aux["member_near_constant"] = in_b ? 1.0 : 0.0;
  r.aux["member_moderate"] = in_c ? 1.0 : 0.0;
  r.aux["member_large"] = in_d ? 1.0 : 0.0;
  r.aux["selector_p_constant"] = select_p_constant(a, g);
  r.aux["selector_p_moderate"] = select_p_moderate(a, d2);
  r.aux["selector_p_large"] = select_p_large(a, g, lam, d3);
  // proof-regime rho = 1 - e W_p/a with W_p at its regime bound; the moderate
  // and large choices collapse to fixed offsets by construction
  r.aux["selector_rho_near_constant"] = std::max(0.0, 1.0 - kE * corr_b);
  r.aux["selector_rho_moderate"] = 1.0 - std::sqrt(0.5);
  r.aux["selector_rho_large"] = 0.5;
  for (const char* k : {"d1", "d2", "d3", "a_mgf", "d1p_tail"}) r.constants_used[k] = t.log_value(k);
  return r;
}

}  // namespace overq
