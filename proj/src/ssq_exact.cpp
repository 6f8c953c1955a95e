#include "overq/ssq_exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace overq {

namespace {

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// log of a Chernoff bound on the Poisson(m) upper tail P(X > k), k > m.
double poisson_log_tail_bound(double m, double k) {
  if (k <= m) return 0.0;
  return k - m - k * std::log(k / m);
}

// Smallest k with Poisson(m) tail bound <= tol.
std::int64_t poisson_cutoff(double m, double tol) {
  double k = std::max(m + 10.0 * std::sqrt(m) + 30.0, 64.0);
  while (poisson_log_tail_bound(m, k) > std::log(tol)) k *= 1.3;
  return static_cast<std::int64_t>(std::ceil(k));
}

double stream_logsum(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double LatticePmf::prob(std::size_t i) const { return std::exp(log_probs[i]); }

nlohmann::json LatticePmf::to_json() const {
  return nlohmann::json{{"offset", offset},
                        {"scale", scale},
                        {"log_probs", log_probs},
                        {"truncation_tail", truncation_tail}};
}

LatticePmf LatticePmf::from_json(const nlohmann::json& j) {
  LatticePmf p;
  p.offset = j.at("offset").get<double>();
  p.scale = j.at("scale").get<double>();
  p.log_probs = j.at("log_probs").get<std::vector<double>>();
  p.truncation_tail = j.at("truncation_tail").get<double>();
  return p;
}

LatticePmf stationary_pmf(const QueueParams& params, double tol, double theta_max) {
  params.check(true);
  if (params.n() != 1) throw std::invalid_argument("stationary_pmf: needs n == 1");
  if (!(tol > 0.0 && tol <= 1e-3)) throw std::invalid_argument("stationary_pmf: tol outside (0, 1e-3]");
  const double lam = params.lambda, mu = params.mu(), gamma = params.gamma;

  std::int64_t K = poisson_cutoff(lam / gamma, tol);
  if (theta_max > 0.0) {
    // Cover the exp(theta)-tilted mass: tilting the dominating Poisson gives
    // Poisson(lambda e^theta / gamma).
    K = std::max(K, poisson_cutoff(lam * std::exp(theta_max) / gamma, tol));
  }

  LatticePmf pmf;
  pmf.offset = (lam - mu) / gamma;
  pmf.scale = std::sqrt(gamma / lam);
  pmf.log_probs.resize(static_cast<std::size_t>(K) + 1);
  pmf.log_probs[0] = 0.0;
  for (std::int64_t i = 1; i <= K; ++i) {
    pmf.log_probs[i] = pmf.log_probs[i - 1] + std::log(lam) - std::log(mu + gamma * static_cast<double>(i));
  }
  const double logZ = stream_logsum(pmf.log_probs);
  for (double& lp : pmf.log_probs) lp -= logZ;
  pmf.truncation_tail = std::exp(poisson_log_tail_bound(lam / gamma, static_cast<double>(K)));
  return pmf;
}

TailProb tail_prob(const LatticePmf& pmf, double a, bool normalized) {
  // q~ > a  <=>  q > offset + a/scale (raw mode: q > a directly).
  double thresh = normalized ? pmf.offset + a / pmf.scale : a;
  TailProb out;
  out.uncertainty = pmf.truncation_tail;
  if (thresh < 0.0) {
    out.log_prob = 0.0;
    out.prob = 1.0;
    return out;
  }
  std::size_t first = static_cast<std::size_t>(std::floor(thresh)) + 1;
  if (first >= pmf.size()) {
    out.log_prob = -std::numeric_limits<double>::infinity();
    out.prob = 0.0;
    return out;
  }
  double ls = -std::numeric_limits<double>::infinity();
  // summed smallest-to-largest is fine in log space
  for (std::size_t i = pmf.size(); i-- > first;) ls = logaddexp(ls, pmf.log_probs[i]);
  out.log_prob = ls;
  out.prob = std::exp(ls);
  return out;
}

double moment_lp(const LatticePmf& pmf, double center, double p) {
  if (p < 1.0) throw std::domain_error("moment_lp: p must be >= 1");
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(pmf.size());
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    double d = std::fabs(static_cast<double>(i) - center);
    terms[i] = (d == 0.0) ? -std::numeric_limits<double>::infinity()
                          : pmf.log_probs[i] + p * std::log(d);
    m = std::max(m, terms[i]);
  }
  if (!std::isfinite(m)) return 0.0;  // point mass at the center
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return std::exp((m + std::log(s)) / p);
}

double mgf_log(const LatticePmf& pmf, double theta, double center) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pmf.size(); ++i)
    m = std::max(m, pmf.log_probs[i] + theta * (static_cast<double>(i) - center));
  double s = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i)
    s += std::exp(pmf.log_probs[i] + theta * (static_cast<double>(i) - center) - m);
  return m + std::log(s);
}

double prob_empty(const LatticePmf& pmf) { return std::exp(pmf.log_probs[0]); }

double log_tail_raw(const QueueParams& params, double threshold) {
  params.check(true);
  if (params.n() != 1) throw std::invalid_argument("log_tail_raw: needs n == 1");
  if (threshold < 0.0) return 0.0;  // whole support
  const double lam = params.lambda, mu = params.mu(), gamma = params.gamma;
  const double peak = std::max(0.0, (lam - mu) / gamma);

  // One pass: accumulate log Z and the log-sum beyond the threshold. Both
  // accumulators run on a shared running max via periodic rescaling.
  double logw = 0.0;
  double logZ = 0.0;  // includes i = 0 term
  double logT = -std::numeric_limits<double>::infinity();
  const double log_lam = std::log(lam);
  std::int64_t i = 0;
  const std::int64_t hard_cap = 2'000'000'000;
  while (true) {
    ++i;
    logw += log_lam - std::log(mu + gamma * static_cast<double>(i));
    if (logw > logZ - 60.0) logZ = logaddexp(logZ, logw);
    if (static_cast<double>(i) > threshold && logw > logT - 60.0) logT = logaddexp(logT, logw);
    if (static_cast<double>(i) > peak + 10.0 && static_cast<double>(i) > threshold + 10.0) {
      double r = lam / (mu + gamma * static_cast<double>(i + 1));
      if (r < 1.0) {
        double logrem = logw + std::log(r) - std::log1p(-r);
        if (logrem < logZ - 40.0 && logrem < logT - 40.0) break;
      }
    }
    if (i > hard_cap) throw std::runtime_error("log_tail_raw: threshold too large");
  }
  return logT - logZ;
}

}  // namespace overq
