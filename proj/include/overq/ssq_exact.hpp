#pragma once

#include <limits>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "overq/model.hpp"

namespace overq {

// A probability mass function on {0,...,K} with affine centering metadata:
// the normalized variable is x~ = (x - offset) * scale. Probabilities are
// kept as logs; lambda/gamma beyond ~1e4 makes linear-space weights overflow.
struct LatticePmf {
  std::vector<double> log_probs;
  double offset = 0.0;
  double scale = 1.0;
  double truncation_tail = 0.0;  // upper bound on discarded mass

  std::size_t size() const { return log_probs.size(); }
  double prob(std::size_t i) const;
  double normalized_value(std::size_t i) const {
    return (static_cast<double>(i) - offset) * scale;
  }

  nlohmann::json to_json() const;
  static LatticePmf from_json(const nlohmann::json& j);
};

// Stationary law of the M/M/1+M chain by the detailed-balance recursion
// pi_i = lambda/(mu + gamma i) pi_{i-1}, normalized in log space. K is grown
// until the Poisson(lambda/gamma) tail beyond K is <= tol, which bounds the
// discarded mass by stochastic dominance. theta_max > 0 additionally grows K
// until the exp(theta_max q)-tilted law (dominated by Poisson(lambda
// e^{theta_max}/gamma)) is covered, so that mgf_log() stays exact up to that
// tilt. tol must lie in (0, 1e-3].
LatticePmf stationary_pmf(const QueueParams& params, double tol = 1e-12, double theta_max = 0.0);

struct TailProb {
  double prob = 0.0;
  double log_prob = -std::numeric_limits<double>::infinity();
  double uncertainty = 0.0;  // additive, from truncation_tail
};

// P(normalized > a) or P(raw > a); exact summation over the retained support.
TailProb tail_prob(const LatticePmf& pmf, double a, bool normalized = true);

// (sum_i pi_i |i - center|^p)^{1/p} in log-sum-exp arithmetic; p >= 1.
double moment_lp(const LatticePmf& pmf, double center, double p);

// log E[e^{theta (q - center)}]; exact over the retained support (build the
// pmf with theta_max >= theta when theta > 0 for a certified value).
double mgf_log(const LatticePmf& pmf, double theta, double center);

double prob_empty(const LatticePmf& pmf);

// log P(q > threshold) by the streaming recursion with no support cap; exact
// up to a reported relative remainder < 1e-15. Handles thresholds far beyond
// double-underflow of the probability itself (the phase-diagram path).
double log_tail_raw(const QueueParams& params, double threshold);

}  // namespace overq
