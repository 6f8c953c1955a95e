#include "overq/constants.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace overq {

namespace {
const double kE = 2.718281828459045;
const double kPi = 3.141592653589793;
const double kSqrt2 = std::sqrt(2.0);
const double kSqrt2Pi = std::sqrt(2.0 * kPi);
const double kSqrtPi = std::sqrt(kPi);

double logv(double x) { return std::log(x); }

std::vector<std::pair<std::string, double>> gamma0_terms_from(const QueueParams& params,
                                                              double log_d1, double log_a_mgf) {
  const double lam = params.lambda, mu = params.mu();
  const double xi = 0.5 - params.alpha - params.epsilon;
  std::vector<std::pair<std::string, double>> v;
  v.emplace_back("e4sqrt2_lam_over_25", 4.0 * kSqrt2 + logv(lam / 25.0));
  if (mu > 0.0) {
    v.emplace_back("mu2_over_4e4sqrt2_lam", 2.0 * logv(mu) - (logv(4.0 * lam) + 4.0 * kSqrt2));
    v.emplace_back("mu", logv(mu));
  }
  const double log_2ed1 = logv(2.0 * kE) + log_d1;
  // as printed: (1/(2e D1))^{-1/xi} and (2e D1)^{-2/xi}
  v.emplace_back("inv_2ed1_pow", (1.0 / xi) * log_2ed1);
  v.emplace_back("2ed1_pow", (-2.0 / xi) * log_2ed1);
  v.emplace_back("2sqrt2_e_d1_inv", -(logv(2.0 * kSqrt2 * kE) + log_d1));
  v.emplace_back("lam_over_a2", logv(lam) - 2.0 * log_a_mgf);
  return v;
}
}  // namespace

double ConstantTable::log_value(const std::string& name) const {
  auto it = log_vals_.find(name);
  if (it == log_vals_.end()) throw std::out_of_range("ConstantTable: unknown constant " + name);
  return it->second;
}

double ConstantTable::value(const std::string& name) const { return std::exp(log_value(name)); }

void ConstantTable::set_log(const std::string& name, double log_v) {
  if (std::isnan(log_v)) throw std::domain_error("ConstantTable: NaN log value for " + name);
  log_vals_[name] = log_v;
}

nlohmann::json ConstantTable::to_json() const {
  nlohmann::json j;
  j["C"] = C;
  j["alpha"] = alpha;
  j["epsilon"] = epsilon;
  nlohmann::json vals, logs;
  for (const auto& [k, lv] : log_vals_) {
    logs[k] = lv;
    vals[k] = std::exp(lv);
  }
  j["log_values"] = logs;
  j["values"] = vals;
  return j;
}

ConstantTable ssq_constants(const QueueParams& params) {
  params.check(true);
  const double lam = params.lambda, mu = params.mu(), C = params.C;
  const double alpha = params.alpha, eps = params.epsilon;
  if (0.5 - alpha - eps <= 0.0) throw std::domain_error("ssq_constants: 1/2 - alpha - epsilon <= 0");
  if (mu <= 0.0) throw std::domain_error("ssq_constants: mu must be positive");

  ConstantTable t;
  t.C = C;
  t.alpha = alpha;
  t.epsilon = eps;

  const double c_prime = lam / mu * std::max(kE, (1.0 + C) * (2.0 + C) / (C * C + C - 1.0));
  const double d_prime = std::sqrt(mu) / (2.0 * std::sqrt(mu) + std::sqrt(2.0 * kPi * kE * kE * lam));
  const double a_mgf = 1.0 + kSqrt2 * c_prime;
  const double y = 1.0 / (2.0 - 4.0 * alpha);
  const double a_gen = c_prime * std::pow(lam / (C * C * mu), y) * std::exp(std::lgamma(y + 1.0));

  const double c1 = 2.0 * kE * std::sqrt(2.0 * kPi * lam) * (2.0 + c_prime * c_prime / 4.0);
  const double c2 = 2.0 * kE * kSqrt2Pi;
  const double c3 = 2.0 + 2.0 * a_gen;
  const double log_c4 = logv(29.0 / 69.0 * 2.0) - 9.0 * (15.0 + a_gen);
  const double c5 = (120.0 + 8.0 * a_gen) * lam;

  const double c1p = kSqrt2 * (1.0 + 2.0 * kE * kSqrtPi + 8.0 * kSqrt2 * kE * kE + 2.0 * kE * kE) *
                     (mu / std::sqrt(lam)) * std::max(c_prime, 1.0);
  const double c2p =
      kSqrt2 * ((4.0 * kE * kSqrt2Pi + 2.0 * kE * kE) / std::sqrt(lam) +
                ((kE + 8.0 * kE * kE + kSqrt2 * kE * kE) * kSqrt2Pi / std::sqrt(lam)) *
                    (c1 + 2.0 * kE * kSqrtPi * lam));
  const double c3p = 8.0 * kE * kSqrtPi / lam;
  const double c4p = c1 + 2.0 * kE * kSqrt2Pi;
  const double c5p = (6.0 + 2.0 * c_prime) / std::sqrt(lam) + 2.0 * kE * kSqrt2Pi;
  const double c6p = 4.0 * kE * kSqrt2Pi;
  // c_quantile carries the quantile-coupling prefactor; c7p multiplies in the
  // idle-probability lower constant.
  const double lml = lam / mu - std::log(lam / mu) - 1.0;
  double log_c_quantile;
  if (lml > 0.0) {
    log_c_quantile = 0.5 * logv(2.0) - logv(2.0 * c_prime) - 2.0 * kSqrt2 - 0.5 * logv(lam) - 0.5 * logv(lml);
  } else {
    log_c_quantile = std::numeric_limits<double>::infinity();  // lambda == mu: prefactor blows up
  }
  const double log_c7p = log_c_quantile + std::min(logv(d_prime) - 0.5 * logv(mu), 0.0);

  const double a_exp = 1.0 + alpha / eps;
  const double d1 = 2.0 * c1p * std::pow(2.0 * lam / (C * C), a_exp) * std::exp(std::lgamma(a_exp + 1.0)) +
                    c2p + c3p;
  const double d2 = c4p + c2p;
  const double d3 = c5p + c6p;
  const double log_d5 = logv(4096.0 * lam) - 4.0 * log_c4 + 4.0 * c5 * lam;
  const double log_d4 = logv(0.5) + log_c4 - 0.5 * logv(lam) - c5 * std::exp(-log_d5);
  const double log_d1p_tail = logv(d1) + 1.0 + 2.0 * kE * d1 - 0.5 * logv(2.0 * kPi);

  t.set_log("c_prime", logv(c_prime));
  t.set_log("d_prime", logv(d_prime));
  t.set_log("a_mgf", logv(a_mgf));
  t.set_log("a_gen", logv(a_gen));
  t.set_log("c1", logv(c1));
  t.set_log("c2", logv(c2));
  t.set_log("c3", logv(c3));
  t.set_log("c4", log_c4);
  t.set_log("c5", logv(c5));
  t.set_log("c1p", logv(c1p));
  t.set_log("c2p", logv(c2p));
  t.set_log("c3p", logv(c3p));
  t.set_log("c4p", logv(c4p));
  t.set_log("c5p", logv(c5p));
  t.set_log("c6p", logv(c6p));
  t.set_log("c7p", log_c7p);
  t.set_log("c_quantile", log_c_quantile);
  t.set_log("d1", logv(d1));
  t.set_log("d2", logv(d2));
  t.set_log("d3", logv(d3));
  t.set_log("d4", log_d4);
  t.set_log("d4p", log_d4);
  t.set_log("d5", log_d5);
  t.set_log("d1p_tail", log_d1p_tail);
  t.set_log("d_tail_2l", logv(2.0 * kE * d1));
  t.set_log("d_tail_2u", logv(std::min(1.0, 1.0 / (2.0 * kE * d1))));
  t.set_log("d_tail_3l", logv(kSqrt2 * kE * d2));
  t.set_log("d_tail_3u", logv(kSqrt2 * kE * d2));
  t.set_log("d_tail_4l", 2.0 * kE * d3 * std::sqrt(lam));

  double g0 = std::numeric_limits<double>::infinity();
  for (const auto& [name, lg] : gamma0_terms_from(params, logv(d1), logv(a_mgf))) g0 = std::min(g0, lg);
  t.set_log("gamma0", g0);
  t.set_log("gamma_a1", log_gamma_a(params, t, 1.0));
  return t;
}

std::vector<std::pair<std::string, double>> gamma0_terms(const QueueParams& params) {
  if (params.mu() <= 0.0) {
    // mu = 0 comparison chain: the D1/A-laden terms degenerate; report the
    // parameter-only ones.
    return gamma0_terms_from(params, 0.0, 0.0);
  }
  ConstantTable t = ssq_constants(params);
  return gamma0_terms_from(params, t.log_value("d1"), t.log_value("a_mgf"));
}

double log_gamma_a(const QueueParams& params, const ConstantTable& t, double a) {
  const double alpha = params.alpha, eps = params.epsilon;
  const double log_d1 = t.log_value("d1");
  const double log_ed1 = 1.0 + log_d1;
  // alpha = 0 degenerates two terms to zero; the proofs' own remedy is to run
  // the log-vs-polynomial step at a small positive exponent, here epsilon.
  const double ae = (alpha > 0.0) ? alpha : eps;
  double m = t.log_value("gamma0");
  m = std::min(m, (1.0 / (1.0 - 2.0 * ae)) * logv(2.0 * ae) -
                      (1.0 / (1.0 - 2.0 * alpha - eps)) * logv(a));
  m = std::min(m, (1.0 / (0.5 - alpha)) * (logv(ae * a) - log_ed1));
  m = std::min(m, -2.0 * (log_ed1 + logv(a)));
  m = std::min(m, (1.0 / (0.5 - alpha - eps)) * logv(0.5 - alpha - eps));
  m = std::min(m, logv(4.0) - 6.0 * logv(a));
  return m;
}

ConstantTable jsq_constants(const QueueParams& params) {
  params.check(true);
  const int n = params.n();
  if (n < 2) throw std::invalid_argument("jsq_constants: n >= 2 (use ssq_constants for n = 1)");
  const double lam = params.lambda, mu = params.mu();
  const double C = params.C, alpha = params.alpha, eps = params.epsilon;
  if (0.5 - alpha - eps <= 0.0) throw std::domain_error("jsq_constants: 1/2 - alpha - epsilon <= 0");

  ConstantTable ssq = ssq_constants(params);
  ConstantTable t;
  t.C = C;
  t.alpha = alpha;
  t.epsilon = eps;

  const double zeta = lam / std::sqrt(static_cast<double>(n) * (n - 1));
  const double a_mgf = ssq.value("a_mgf");

  // MGF envelope constant of the summed queue.
  const double y = 1.0 / (0.5 - alpha);
  const double a_jsq = (1.0 + n * mu * std::exp(std::lgamma(y + 1.0)) * std::pow(C / (2.0 * n * lam), -y)) /
                       static_cast<double>(n);
  const double c_jsq_pp = 2.0 * kE * kSqrt2Pi;  // sqrt(p)/sqrt(gamma) coefficient
  const double c_jsq_p = (a_jsq + 1.0 / n) *
                         std::sqrt(2.0 * (std::exp(static_cast<double>(n)) / n - 1.0 - 1.0 / n) * lam) *
                         2.0 * kE * kSqrt2Pi;

  // State-space-collapse constants; exp(2 lam - mu/n) handled in log space.
  const double log_ex = 2.0 * lam - mu / n;
  const double core = lam + mu + 2.0 * kSqrt2Pi / kE * a_mgf * std::exp(log_ex) * n;
  const double e1 = 18.0 / zeta * core;
  const double e2 = 4.0 * n * std::max(1.0, 1.0 / zeta) *
                    (zeta * core + 6.0 * ((lam + mu) * (lam + mu) +
                                          4.0 * kSqrt2Pi / kE * a_mgf * std::exp(log_ex) * n * n));
  const double e_ssc = std::max(e1, e2);

  const double a1 = kSqrt2 * (((kE + 8.0 * kE * kE + kSqrt2 * kE * kE) * kSqrt2Pi / std::sqrt(lam)) *
                                  (c_jsq_pp + c_jsq_p * lam / kSqrt2) +
                              (4.0 * kE * kSqrt2Pi + 2.0 * kE * kE) / std::sqrt(lam));
  const double a1p = kSqrt2 * (1.0 + 2.0 * kE * kSqrtPi + 8.0 * kSqrt2 * kE * kE + 2.0 * kE * kE) *
                     (mu / std::sqrt(lam));
  const double a2 = c_jsq_pp * lam / kSqrt2 + 4.0 * kE * kSqrt2Pi / std::sqrt(lam);
  const double a2p = c_jsq_p;
  const double a2pp = n * (a_jsq + 1.0 / n) + 1.0 / std::sqrt(2.0 * lam);

  const double a_exp = 1.0 + (1.0 + 2.0 * alpha) / (2.0 * eps);
  const double poly = std::pow(2.0 * n * lam / (C * C), a_exp) * std::exp(std::lgamma(a_exp + 1.0));
  const double e_wp = a1 + a1p * poly + a2 + a2p;
  const double b1 = a1 + a1p * poly + e_ssc / std::sqrt(lam);
  const double b2 = a2 + e_ssc / std::sqrt(lam);
  const double iota = std::min(1.0 / 3.0, 0.5 - alpha - eps);
  const double c_sub = std::min(std::sqrt(1.0 / (2.0 * kE * b2)), std::pow(1.0 / (2.0 * kE * b2), 2.0));
  const double g_worst = 2.0 * std::pow(lam, 0.25) / (kE * std::sqrt(n * e_ssc));

  const double log_c_ot = ssq.log_value("c_quantile");

  // phi = 1/sqrt(n) * 1 is the canonical direction used for the stored
  // thresholds; direction-specific values are recomputed inside the tail op.
  const double dot1 = std::sqrt(static_cast<double>(n));
  const double e_tail_1u = std::min(2.0 * dot1 * dot1, std::pow(std::pow(dot1, 4.0) / (kE * b1), 1.0 / 3.0));
  const double e_tail_2u = kE * kE * n * std::sqrt(e_ssc) / std::sqrt(lam);

  // gamma_1: the direction-free threshold terms.
  const double xi = 0.5 - alpha - eps;
  double log_g1 = std::min({-1.0, logv(mu), 2.0 * logv(lam / C) + logv(std::pow(std::log(lam / mu), 2.0)),
                            4.0 * kSqrt2 + logv(lam / 25.0),
                            2.0 * logv(mu) - (logv(100.0 * lam) + 4.0 * kSqrt2),
                            (2.0 / xi) * logv(xi / 2.0), -(logv(65536.0) + 4.0 + 4.0 * logv(b1))});
  const double log_g2_phi = (2.0 / iota) * std::min(logv(dot1 * dot1),
                                                    logv(0.5) + (1.0 / 3.0) * (4.0 * logv(dot1) - 1.0 - logv(b1)));
  const double log_g2 = std::min(log_g1, log_g2_phi);

  t.set_log("zeta", logv(zeta));
  t.set_log("a_mgf", std::log(a_mgf));
  t.set_log("a_jsq_mgf", logv(a_jsq));
  t.set_log("c_jsq_prime", logv(c_jsq_p));
  t.set_log("c_jsq_pprime", logv(c_jsq_pp));
  t.set_log("a1", logv(a1));
  t.set_log("a1p", logv(a1p));
  t.set_log("a2", logv(a2));
  t.set_log("a2p", logv(a2p));
  t.set_log("a2pp", logv(a2pp));
  t.set_log("e1", logv(e1));
  t.set_log("e2", logv(e2));
  t.set_log("e_ssc", logv(e_ssc));
  t.set_log("e_wp", logv(e_wp));
  t.set_log("b1", logv(b1));
  t.set_log("b2", logv(b2));
  t.set_log("iota", logv(iota));
  t.set_log("c_subweibull", logv(c_sub));
  t.set_log("g_worst", logv(g_worst));
  t.set_log("c_ot_prime", log_c_ot);
  t.set_log("e_tail_1u", logv(e_tail_1u));
  t.set_log("e_tail_2u", logv(e_tail_2u));
  t.set_log("gamma1", log_g1);
  t.set_log("gamma2", log_g2);
  t.set_log("c4", ssq.log_value("c4"));
  t.set_log("c5", ssq.log_value("c5"));
  t.set_log("c6p", ssq.log_value("c6p"));
  t.set_log("d4p", ssq.log_value("d4p"));
  t.set_log("d5", ssq.log_value("d5"));
  t.set_log("c_prime", ssq.log_value("c_prime"));
  return t;
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::kNone: return "none";
    case Regime::kConstantDev: return "constant";
    case Regime::kNearConstant: return "near_constant";
    case Regime::kModerate: return "moderate";
    case Regime::kLarge: return "large";
    case Regime::kWp1: return "wp1";
    case Regime::kWp2: return "wp2";
    case Regime::kWp3: return "wp3";
  }
  return "?";
}

void BoundReport::set_lower_log(double lg) {
  log_lower = lg;
  lower = std::exp(lg);
}
void BoundReport::set_upper_log(double lg) {
  log_upper = lg;
  upper = std::exp(lg);
}
void BoundReport::set_lower(double v) {
  lower = v;
  log_lower = (v > 0.0) ? std::log(v) : -std::numeric_limits<double>::infinity();
}
void BoundReport::set_upper(double v) {
  upper = v;
  log_upper = (v > 0.0) ? std::log(v)
                        : ((v == 0.0) ? -std::numeric_limits<double>::infinity()
                                      : std::numeric_limits<double>::quiet_NaN());
}

nlohmann::json BoundReport::to_json() const {
  nlohmann::json j;
  j["lower"] = lower;
  j["upper"] = upper;
  j["log_lower"] = log_lower;
  j["log_upper"] = log_upper;
  j["regime"] = to_string(regime);
  j["valid"] = valid;
  for (const auto& [k, v] : preconditions) j["pre_" + k] = v;
  for (const auto& [k, v] : constants_used) j["const_" + k] = v;
  for (const auto& [k, v] : aux) j["aux_" + k] = v;
  return j;
}

}  // namespace overq
