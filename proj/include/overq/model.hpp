#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace overq {

// Parameters of the two abandonment models. `mus` has one entry per server;
// n == 1 is the single-server queue. (C, alpha) parameterize the heavily
// overloaded regime lambda/mu - 1 >= C (gamma/mu)^alpha and epsilon is the
// slack used inside the regime-dependent constants.
struct QueueParams {
  double lambda = 0.0;
  std::vector<double> mus;
  double gamma = 0.0;
  double C = 1.5;
  double alpha = 0.0;
  double epsilon = 0.05;  // default 0.1*(1/2 - alpha), see make()

  int n() const { return static_cast<int>(mus.size()); }
  double mu() const;  // total service rate

  // Throws std::invalid_argument when a structural invariant fails:
  // lambda > 0, every mus[i] > 0 (mu == 0 is allowed only as the degenerate
  // M/M/inf comparison chain, flagged via allow_mu_zero), gamma > 0, C > 0,
  // alpha in [0, 1/2), 0 < epsilon < 1/2 - alpha.
  // C > 1 is a regime condition, not a constructor gate; it is
  // reported by validate_regime instead so that boundary settings like C = 1
  // remain computable.
  void check(bool allow_mu_zero = false) const;

  static QueueParams make(double lambda, std::vector<double> mus, double gamma,
                          double C = 1.5, double alpha = 0.0, double epsilon = -1.0);
  static QueueParams ssq(double lambda, double mu, double gamma, double C = 1.5,
                         double alpha = 0.0, double epsilon = -1.0);

  // {"lambda","mus","gamma","C","alpha","epsilon"}; "mus" accepts a scalar.
  static QueueParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Diagnostic only: nothing downstream refuses to evaluate when these fail;
// bound reports carry validity flags instead.
struct RegimeCheck {
  bool overload_ok = false;       // lambda/mu - 1 >= C (gamma/mu)^alpha
  double gamma0 = 0.0;            // admissibility threshold, min over terms below
  bool gamma_ok = false;          // gamma <= gamma0
  std::map<std::string, double> details;
};

RegimeCheck validate_regime(const QueueParams& params);

struct SsqRateEntry {
  std::int64_t target = 0;
  double rate = 0.0;
};

struct JsqRateEntry {
  std::vector<std::int64_t> target;
  double rate = 0.0;
};

// Birth-death rates of the M/M/1+M chain at `state`: birth lambda, death
// mu + gamma*state when state >= 1. Requires n == 1 and state >= 0.
std::vector<SsqRateEntry> ssq_rates(const QueueParams& params, std::int64_t state);

// JSQ transition rates at `state`: the arrival goes to the lexicographically
// smallest argmin coordinate; server i dies at rate mu_i 1{q_i>0} + gamma q_i.
// Zero-rate entries are omitted.
std::vector<JsqRateEntry> jsq_rates(const QueueParams& params,
                                    std::span<const std::int64_t> state);

double total_outflow(const QueueParams& params, std::span<const std::int64_t> state);

}  // namespace overq
