#include "overq/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "overq/constants.hpp"

namespace overq {

double QueueParams::mu() const { return std::accumulate(mus.begin(), mus.end(), 0.0); }

void QueueParams::check(bool allow_mu_zero) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
  if (mus.empty()) throw std::invalid_argument("need at least one server");
  for (double m : mus) {
    if (!std::isfinite(m) || m < 0.0 || (!allow_mu_zero && m == 0.0))
      throw std::invalid_argument("every service rate must be > 0");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be > 0");
  if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be > 0");
  if (!(alpha >= 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must be in [0, 1/2)");
  if (!(epsilon > 0.0 && epsilon < 0.5 - alpha))
    throw std::invalid_argument("epsilon must be in (0, 1/2 - alpha)");
}

QueueParams QueueParams::make(double lambda, std::vector<double> mus, double gamma, double C,
                              double alpha, double epsilon) {
  QueueParams p;
  p.lambda = lambda;
  p.mus = std::move(mus);
  p.gamma = gamma;
  p.C = C;
  p.alpha = alpha;
  p.epsilon = (epsilon > 0.0) ? epsilon : 0.1 * (0.5 - alpha);
  p.check(/*allow_mu_zero=*/true);
  return p;
}

QueueParams QueueParams::ssq(double lambda, double mu, double gamma, double C, double alpha,
                             double epsilon) {
  return make(lambda, {mu}, gamma, C, alpha, epsilon);
}

QueueParams QueueParams::from_json(const nlohmann::json& j) {
  std::vector<double> mus;
  if (j.at("mus").is_number()) {
    mus.push_back(j.at("mus").get<double>());
  } else {
    mus = j.at("mus").get<std::vector<double>>();
  }
  return make(j.at("lambda").get<double>(), std::move(mus), j.at("gamma").get<double>(),
              j.value("C", 1.5), j.value("alpha", 0.0), j.value("epsilon", -1.0));
}

nlohmann::json QueueParams::to_json() const {
  return nlohmann::json{{"lambda", lambda}, {"mus", mus},     {"gamma", gamma},
                        {"C", C},           {"alpha", alpha}, {"epsilon", epsilon}};
}

RegimeCheck validate_regime(const QueueParams& params) {
  params.check(true);
  RegimeCheck rc;
  const double mu = params.mu();
  const double lhs = params.lambda / mu - 1.0;
  const double rhs = params.C * std::pow(params.gamma / mu, params.alpha);
  rc.overload_ok = lhs >= rhs;
  rc.details["overload_lhs"] = lhs;
  rc.details["overload_rhs"] = rhs;
  rc.details["C_gt_1"] = params.C > 1.0 ? 1.0 : 0.0;

  const auto terms = gamma0_terms(params);
  double g0 = std::numeric_limits<double>::infinity();
  for (const auto& [name, log_v] : terms) {
    rc.details["gamma0_" + name] = std::exp(log_v);
    g0 = std::min(g0, std::exp(log_v));
  }
  rc.gamma0 = g0;
  rc.gamma_ok = params.gamma <= g0;
  rc.details["gamma"] = params.gamma;
  rc.details["gamma0"] = g0;
  return rc;
}

std::vector<SsqRateEntry> ssq_rates(const QueueParams& params, std::int64_t state) {
  if (params.n() != 1) throw std::invalid_argument("ssq_rates: needs n == 1");
  if (state < 0) throw std::invalid_argument("ssq_rates: negative state");
  std::vector<SsqRateEntry> out;
  out.push_back({state + 1, params.lambda});
  if (state >= 1) {
    double rate = params.mus[0] + params.gamma * static_cast<double>(state);
    if (rate > 0.0) out.push_back({state - 1, rate});
  }
  return out;
}

std::vector<JsqRateEntry> jsq_rates(const QueueParams& params,
                                    std::span<const std::int64_t> state) {
  const int n = params.n();
  if (static_cast<int>(state.size()) != n) throw std::invalid_argument("jsq_rates: dimension mismatch");
  std::size_t star = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] < 0) throw std::invalid_argument("jsq_rates: negative coordinate");
    if (state[i] < state[star]) star = i;  // lexicographic tie-break: keep smallest index
  }
  std::vector<JsqRateEntry> out;
  std::vector<std::int64_t> t(state.begin(), state.end());
  t[star] += 1;
  out.push_back({t, params.lambda});
  for (int i = 0; i < n; ++i) {
    if (state[i] <= 0) continue;
    double rate = params.mus[i] + params.gamma * static_cast<double>(state[i]);
    if (rate <= 0.0) continue;
    std::vector<std::int64_t> d(state.begin(), state.end());
    d[i] -= 1;
    out.push_back({std::move(d), rate});
  }
  return out;
}

double total_outflow(const QueueParams& params, std::span<const std::int64_t> state) {
  double r = params.lambda;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] > 0) r += params.mus[i] + params.gamma * static_cast<double>(state[i]);
  }
  return r;
}

}  // namespace overq
