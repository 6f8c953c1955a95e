#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "overq/model.hpp"
#include "overq/ssq_exact.hpp"

namespace overq {

// Stationary law of the JSQ chain on the truncated box {0..cap}^n. Rates that
// would leave the box are dropped (substochastic truncation); `leak` is the
// stationary outflow mass across that boundary, which quantifies the bias.
struct JointPmf {
  int n = 0;
  int cap = 0;
  std::vector<double> log_probs;  // row-major over the box
  double residual = 0.0;          // max-norm global-balance residual
  double leak = 0.0;

  std::size_t index(std::span<const std::int64_t> state) const;
  double prob(std::size_t idx) const;
  std::size_t size() const { return log_probs.size(); }
  void state_of(std::size_t idx, std::vector<std::int64_t>& out) const;

  nlohmann::json to_json_sparse(double threshold = 0.0) const;  // triplet list
};

// Gauss-Seidel solve of pi Q = 0 on the box, normalized, to max-norm residual
// <= tol. Throws on state-space budget overrun (cap^n > 2e6) or
// non-convergence within the sweep cap.
JointPmf exact_stationary_small(const QueueParams& params, int cap, double tol = 1e-10,
                                int max_sweeps = 200000);

// Exact functionals of a JointPmf.
double joint_sum_p_qi_zero(const JointPmf& pmf);                   // sum_i P(q_i = 0)
double joint_p_all_zero(const JointPmf& pmf);                      // P(sum_i q_i = 0)
double joint_mean_qi(const JointPmf& pmf, int i);
double joint_qperp_moment(const JointPmf& pmf, double p);          // E ||q_perp||^p
double joint_qsum_hat_lp(const QueueParams& params, const JointPmf& pmf, double p);
// Marginal law of sum_i q_i as a LatticePmf carrying the q~_Sigma metadata
// (offset (lambda-mu)/gamma, scale sqrt(gamma/lambda)).
LatticePmf joint_sum_marginal(const QueueParams& params, const JointPmf& pmf);

// P(<q~, phi> > a) with q~ = (n sqrt(gamma)/sqrt(lambda)) (q - (lambda-mu)/(n gamma) 1).
// phi must have unit norm within 1e-12.
double projected_tail(const QueueParams& params, const JointPmf& pmf,
                      std::span<const double> phi, double a);

// Monte-Carlo point estimate with a batch-means confidence interval.
struct SimEstimate {
  double value = 0.0;
  double ci_halfwidth = 0.0;  // 95%, Student-t over batches
  int batches = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  double burn_in = 0.0;
};

// Event-driven CTMC simulation; time-averaged estimators over (burn_in,
// horizon] with >= 30 batch-means batches. Estimand keys:
//   "p0_sum"           time average of sum_i 1{q_i = 0}
//   "p_all_zero"       time average of 1{sum q_i = 0}
//   "mean_q:<i>"       E q_i
//   "qperp_moment:<p>" E ||q_perp||^p            (p <= 64)
//   "qsum_hat_moment:<p>"  E |sum q_i - (lambda-mu)/gamma|^p
//   "proj_tail:<a>:<phi_0>,...,<phi_{n-1}>"  P(<q~,phi> > a)
std::map<std::string, SimEstimate> simulate_stationary(const QueueParams& params, double horizon,
                                                       double burn_in, std::uint64_t seed,
                                                       const std::vector<std::string>& estimands);

// Pathwise coupling monitor: pooled SSQ, JSQ, and the service-free M/M/inf
// system driven by one synchronized event stream (shared arrival labels,
// shared per-customer patience clocks, one rate-mu service stream split
// across servers by mu_i/mu). Checks the label-set inclusions
//   SSQ subset JSQ subset M/M/inf
// at every epoch. Any violation is a hard failure recorded with its epoch.
struct CouplingReport {
  std::uint64_t epochs = 0;
  std::uint64_t violations = 0;
  std::string first_violation;  // empty unless violations > 0
  std::size_t final_ssq_size = 0;
  std::size_t final_jsq_size = 0;
  std::size_t final_mminf_size = 0;
};

CouplingReport coupling_dominance(const QueueParams& params, std::uint64_t epochs,
                                  std::uint64_t seed);

}  // namespace overq
