#include "overq/jsq_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "overq/rng.hpp"

namespace overq {

namespace {

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// 97.5% Student-t quantile, Cornish-Fisher expansion around the normal
// quantile; plenty for df >= 29.
double t_quantile_975(int df) {
  const double z = 1.959963984540054;
  double v = static_cast<double>(df);
  double z3 = z * z * z, z5 = z3 * z * z, z7 = z5 * z * z;
  return z + (z3 + z) / (4.0 * v) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * v * v) +
         (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * v * v * v);
}

}  // namespace

std::size_t JointPmf::index(std::span<const std::int64_t> state) const {
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) idx = idx * (cap + 1) + static_cast<std::size_t>(state[i]);
  return idx;
}

double JointPmf::prob(std::size_t idx) const { return std::exp(log_probs[idx]); }

void JointPmf::state_of(std::size_t idx, std::vector<std::int64_t>& out) const {
  out.resize(n);
  for (int i = n - 1; i >= 0; --i) {
    out[i] = static_cast<std::int64_t>(idx % (cap + 1));
    idx /= (cap + 1);
  }
}

nlohmann::json JointPmf::to_json_sparse(double threshold) const {
  nlohmann::json trip = nlohmann::json::array();
  std::vector<std::int64_t> st;
  for (std::size_t idx = 0; idx < size(); ++idx) {
    double pr = prob(idx);
    if (pr <= threshold) continue;
    state_of(idx, st);
    nlohmann::json row = nlohmann::json::array();
    for (auto v : st) row.push_back(v);
    row.push_back(pr);
    trip.push_back(std::move(row));
  }
  return nlohmann::json{{"n", n}, {"cap", cap}, {"residual", residual}, {"leak", leak},
                        {"triplets", std::move(trip)}};
}

JointPmf exact_stationary_small(const QueueParams& params, int cap, double tol, int max_sweeps) {
  params.check(true);
  const int n = params.n();
  if (n > 3) throw std::invalid_argument("exact_stationary_small: n <= 3 only");
  if (cap < 1) throw std::invalid_argument("exact_stationary_small: cap must be >= 1");
  double budget = std::pow(static_cast<double>(cap) + 1.0, n);
  if (budget > 2.2e6) throw std::invalid_argument("exact_stationary_small: state-space budget exceeded");
  const std::size_t N = static_cast<std::size_t>(budget);
  const double lam = params.lambda, g = params.gamma;

  std::vector<std::size_t> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<std::size_t>(cap + 1);

  std::vector<std::int64_t> s(n);
  auto decode = [&](std::size_t idx, std::vector<std::int64_t>& out) {
    for (int i = n - 1; i >= 0; --i) {
      out[i] = static_cast<std::int64_t>(idx % (cap + 1));
      idx /= (cap + 1);
    }
  };
  auto argmin_lex = [&](const std::vector<std::int64_t>& st) {
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (st[i] < st[best]) best = i;
    return best;
  };
  auto out_rate = [&](const std::vector<std::int64_t>& st) {
    // outflow kept inside the box; the arrival is dropped only at the
    // all-cap corner (its target leaves the box there)
    bool all_cap = true;
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
      if (st[i] != cap) all_cap = false;
      if (st[i] > 0) d += params.mus[i] + g * static_cast<double>(st[i]);
    }
    return d + (all_cap ? 0.0 : lam);
  };
  // inflow(s) = lam * sum over i { pi(s - e_i) : s_i >= 1 and argmin(s-e_i) == i }
  //           + sum over i { pi(s + e_i) (mu_i + gamma (s_i + 1)) : s_i + 1 <= cap }
  std::vector<double> pi(N, 1.0 / static_cast<double>(N));
  std::vector<std::int64_t> t(n);
  auto inflow = [&](std::size_t idx, const std::vector<std::int64_t>& st) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (st[i] >= 1) {
        t = st;
        t[i] -= 1;
        if (argmin_lex(t) == i) acc += lam * pi[idx - stride[i]];
      }
      if (st[i] + 1 <= cap) {
        acc += (params.mus[i] + g * static_cast<double>(st[i] + 1)) * pi[idx + stride[i]];
      }
    }
    return acc;
  };

  double res = std::numeric_limits<double>::infinity();
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    for (std::size_t idx = 0; idx < N; ++idx) {
      decode(idx, s);
      pi[idx] = inflow(idx, s) / out_rate(s);
    }
    double mass = 0.0;
    for (double v : pi) mass += v;
    for (double& v : pi) v /= mass;
    if (sweep % 16 == 15) {
      res = 0.0;
      for (std::size_t idx = 0; idx < N; ++idx) {
        decode(idx, s);
        res = std::max(res, std::fabs(inflow(idx, s) - pi[idx] * out_rate(s)));
      }
      if (res <= tol) break;
    }
  }
  if (res > tol) throw std::runtime_error("exact_stationary_small: no convergence within sweep cap");

  JointPmf out;
  out.n = n;
  out.cap = cap;
  out.residual = res;
  out.leak = pi[N - 1] * lam;  // all-cap corner is the only dropped outflow
  out.log_probs.resize(N);
  for (std::size_t i = 0; i < N; ++i)
    out.log_probs[i] = pi[i] > 0.0 ? std::log(pi[i]) : -std::numeric_limits<double>::infinity();
  return out;
}

double joint_sum_p_qi_zero(const JointPmf& pmf) {
  double acc = 0.0;
  std::vector<std::int64_t> st;
  for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
    pmf.state_of(idx, st);
    int zeros = 0;
    for (auto v : st) zeros += (v == 0);
    if (zeros > 0) acc += zeros * pmf.prob(idx);
  }
  return acc;
}

double joint_p_all_zero(const JointPmf& pmf) { return pmf.prob(0); }

double joint_mean_qi(const JointPmf& pmf, int i) {
  double acc = 0.0;
  std::vector<std::int64_t> st;
  for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
    pmf.state_of(idx, st);
    acc += static_cast<double>(st[i]) * pmf.prob(idx);
  }
  return acc;
}

double joint_qperp_moment(const JointPmf& pmf, double p) {
  double acc = 0.0;
  std::vector<std::int64_t> st;
  for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
    pmf.state_of(idx, st);
    double mean = 0.0;
    for (auto v : st) mean += static_cast<double>(v);
    mean /= pmf.n;
    double q2 = 0.0;
    for (auto v : st) q2 += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    if (q2 > 0.0) acc += std::exp(pmf.log_probs[idx] + 0.5 * p * std::log(q2));
  }
  return acc;
}

double joint_qsum_hat_lp(const QueueParams& params, const JointPmf& pmf, double p) {
  const double c = (params.lambda - params.mu()) / params.gamma;
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(pmf.size(), -std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> st;
  for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
    pmf.state_of(idx, st);
    double qsum = 0.0;
    for (auto v : st) qsum += static_cast<double>(v);
    double d = std::fabs(qsum - c);
    if (d == 0.0) continue;
    terms[idx] = pmf.log_probs[idx] + p * std::log(d);
    m = std::max(m, terms[idx]);
  }
  if (!std::isfinite(m)) return 0.0;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - m);
  return std::exp((m + std::log(sum)) / p);
}

LatticePmf joint_sum_marginal(const QueueParams& params, const JointPmf& pmf) {
  LatticePmf out;
  out.offset = (params.lambda - params.mu()) / params.gamma;
  out.scale = std::sqrt(params.gamma / params.lambda);
  out.truncation_tail = pmf.leak;
  out.log_probs.assign(static_cast<std::size_t>(pmf.n) * pmf.cap + 1,
                       -std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> st;
  for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
    pmf.state_of(idx, st);
    std::size_t qsum = 0;
    for (auto v : st) qsum += static_cast<std::size_t>(v);
    out.log_probs[qsum] = logaddexp(out.log_probs[qsum], pmf.log_probs[idx]);
  }
  return out;
}

double projected_tail(const QueueParams& params, const JointPmf& pmf,
                      std::span<const double> phi, double a) {
  if (static_cast<int>(phi.size()) != pmf.n) throw std::invalid_argument("projected_tail: phi size");
  double norm = 0.0;
  for (double v : phi) norm += v * v;
  if (std::fabs(std::sqrt(norm) - 1.0) > 1e-12)
    throw std::invalid_argument("projected_tail: phi must have unit norm");
  const double pref = pmf.n * std::sqrt(params.gamma / params.lambda);
  const double center = (params.lambda - params.mu()) / (pmf.n * params.gamma);
  double acc = 0.0;
  std::vector<std::int64_t> st;
  for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
    pmf.state_of(idx, st);
    double dot = 0.0;
    for (int i = 0; i < pmf.n; ++i) dot += (static_cast<double>(st[i]) - center) * phi[i];
    if (pref * dot > a) acc += pmf.prob(idx);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Event-driven simulation
// ---------------------------------------------------------------------------

namespace {

struct Estimator {
  std::string key;
  // pointwise functional of the state, time-averaged
  std::function<double(const std::vector<std::int64_t>&)> f;
};

std::vector<Estimator> parse_estimands(const QueueParams& params,
                                       const std::vector<std::string>& keys) {
  const int n = params.n();
  const double qsum_center = (params.lambda - params.mu()) / params.gamma;
  std::vector<Estimator> out;
  for (const auto& key : keys) {
    std::vector<std::string> parts;
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    const std::string& head = parts[0];
    if (head == "p0_sum") {
      out.push_back({key, [](const std::vector<std::int64_t>& q) {
                       double z = 0.0;
                       for (auto v : q) z += (v == 0);
                       return z;
                     }});
    } else if (head == "p_all_zero") {
      out.push_back({key, [](const std::vector<std::int64_t>& q) {
                       for (auto v : q)
                         if (v != 0) return 0.0;
                       return 1.0;
                     }});
    } else if (head == "mean_q" && parts.size() == 2) {
      int i = std::stoi(parts[1]);
      if (i < 0 || i >= n) throw std::invalid_argument("estimand index out of range: " + key);
      out.push_back({key, [i](const std::vector<std::int64_t>& q) {
                       return static_cast<double>(q[i]);
                     }});
    } else if (head == "qperp_moment" && parts.size() == 2) {
      double p = std::stod(parts[1]);
      if (p > 64.0) throw std::invalid_argument("estimand p beyond numeric stability: " + key);
      out.push_back({key, [p, n](const std::vector<std::int64_t>& q) {
                       double mean = 0.0;
                       for (auto v : q) mean += static_cast<double>(v);
                       mean /= n;
                       double q2 = 0.0;
                       for (auto v : q) q2 += (v - mean) * (v - mean);
                       return std::pow(q2, 0.5 * p);
                     }});
    } else if (head == "qsum_hat_moment" && parts.size() == 2) {
      double p = std::stod(parts[1]);
      if (p > 64.0) throw std::invalid_argument("estimand p beyond numeric stability: " + key);
      out.push_back({key, [p, qsum_center](const std::vector<std::int64_t>& q) {
                       double s = 0.0;
                       for (auto v : q) s += static_cast<double>(v);
                       return std::pow(std::fabs(s - qsum_center), p);
                     }});
    } else if (head == "proj_tail" && parts.size() == 3) {
      double a = std::stod(parts[1]);
      std::vector<double> phi;
      std::stringstream ps(parts[2]);
      std::string c;
      while (std::getline(ps, c, ',')) phi.push_back(std::stod(c));
      if (static_cast<int>(phi.size()) != n) throw std::invalid_argument("phi size mismatch: " + key);
      double norm = 0.0;
      for (double v : phi) norm += v * v;
      if (std::fabs(std::sqrt(norm) - 1.0) > 1e-12)
        throw std::invalid_argument("phi must be unit norm: " + key);
      double pref = n * std::sqrt(params.gamma / params.lambda);
      double center = (params.lambda - params.mu()) / (n * params.gamma);
      out.push_back({key, [a, phi, pref, center](const std::vector<std::int64_t>& q) {
                       double dot = 0.0;
                       for (std::size_t i = 0; i < phi.size(); ++i)
                         dot += (static_cast<double>(q[i]) - center) * phi[i];
                       return pref * dot > a ? 1.0 : 0.0;
                     }});
    } else {
      throw std::invalid_argument("unknown estimand: " + key);
    }
  }
  return out;
}

}  // namespace

std::map<std::string, SimEstimate> simulate_stationary(const QueueParams& params, double horizon,
                                                       double burn_in, std::uint64_t seed,
                                                       const std::vector<std::string>& estimands) {
  params.check(true);
  if (!(horizon > burn_in && burn_in > 0.0))
    throw std::invalid_argument("simulate_stationary: need horizon > burn_in > 0");
  const int n = params.n();
  auto est = parse_estimands(params, estimands);
  const int B = 32;  // batch-means batches
  const double span = horizon - burn_in;
  const double batch_len = span / B;

  std::vector<std::vector<double>> batch_sums(est.size(), std::vector<double>(B, 0.0));
  std::vector<std::int64_t> q(n, 0);
  CounterRng rng(seed, 4);

  double t = 0.0;
  std::vector<double> fvals(est.size(), 0.0);
  auto eval_all = [&]() {
    for (std::size_t e = 0; e < est.size(); ++e) fvals[e] = est[e].f(q);
  };
  eval_all();

  while (t < horizon) {
    double total = params.lambda;
    for (int i = 0; i < n; ++i)
      if (q[i] > 0) total += params.mus[i] + params.gamma * static_cast<double>(q[i]);
    double dt = rng.next_exp(total);
    double t_next = t + dt;

    // accumulate the piecewise-constant functionals over [t, t_next)
    double lo = std::max(t, burn_in);
    double hi = std::min(t_next, horizon);
    while (lo < hi) {
      int b = std::min(B - 1, static_cast<int>((lo - burn_in) / batch_len));
      double bend = burn_in + (b + 1) * batch_len;
      double seg = std::min(hi, bend) - lo;
      for (std::size_t e = 0; e < est.size(); ++e) batch_sums[e][b] += fvals[e] * seg;
      lo += seg;
    }
    t = t_next;
    if (t >= horizon) break;

    // pick the event
    double u = rng.next_u01() * total;
    if (u < params.lambda) {
      int star = 0;
      for (int i = 1; i < n; ++i)
        if (q[i] < q[star]) star = i;
      q[star] += 1;
    } else {
      u -= params.lambda;
      for (int i = 0; i < n; ++i) {
        if (q[i] <= 0) continue;
        double r = params.mus[i] + params.gamma * static_cast<double>(q[i]);
        if (u < r) {
          q[i] -= 1;
          break;
        }
        u -= r;
      }
    }
    eval_all();
  }

  std::map<std::string, SimEstimate> out;
  const double tq = t_quantile_975(B - 1);
  for (std::size_t e = 0; e < est.size(); ++e) {
    double mean = 0.0;
    for (double s : batch_sums[e]) mean += s / batch_len;
    mean /= B;
    double var = 0.0;
    for (double s : batch_sums[e]) {
      double d = s / batch_len - mean;
      var += d * d;
    }
    var /= (B - 1);
    SimEstimate se;
    se.value = mean;
    se.ci_halfwidth = tq * std::sqrt(var / B);
    se.batches = B;
    se.seed = seed;
    se.horizon = horizon;
    se.burn_in = burn_in;
    out[est[e].key] = se;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pathwise coupling monitor
// ---------------------------------------------------------------------------

CouplingReport coupling_dominance(const QueueParams& params, std::uint64_t epochs,
                                  std::uint64_t seed) {
  params.check(true);
  if (epochs == 0) throw std::invalid_argument("coupling_dominance: epochs must be > 0");
  const int n = params.n();
  const double lam = params.lambda, mu = params.mu(), g = params.gamma;

  CounterRng arrivals(seed, 0);
  CounterRng patience(seed, 1);
  CounterRng service(seed, 2);
  CounterRng pick(seed, 3);

  // Per-label membership flags; labels are dense indices.
  std::vector<unsigned char> in_jsq, in_ssq, in_mminf;
  std::vector<int> jsq_queue_of;
  std::vector<std::deque<std::uint64_t>> jsq_q(n);
  std::deque<std::uint64_t> ssq_q;
  std::vector<std::int64_t> jsq_len(n, 0);
  std::int64_t ssq_len = 0, mminf_len = 0;
  // expiry heap over every label alive in M/M/inf (the superset)
  using HeapItem = std::pair<double, std::uint64_t>;
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> expiry;

  CouplingReport rep;
  auto violation = [&](std::uint64_t label, const char* where) {
    ++rep.violations;
    if (rep.first_violation.empty()) {
      rep.first_violation = std::string(where) + " at epoch " + std::to_string(rep.epochs) +
                            ", label " + std::to_string(label);
    }
  };
  auto check_label = [&](std::uint64_t k, const char* where) {
    bool s = k < in_ssq.size() && in_ssq[k];
    bool j = k < in_jsq.size() && in_jsq[k];
    bool m = k < in_mminf.size() && in_mminf[k];
    if ((s && !j) || (j && !m)) violation(k, where);
  };

  double t = 0.0;
  double next_arrival = arrivals.next_exp(lam);
  double next_service = (mu > 0.0) ? service.next_exp(mu) : std::numeric_limits<double>::infinity();
  std::uint64_t next_label = 0;

  auto serve_from_deque = [&](std::deque<std::uint64_t>& dq, std::vector<unsigned char>& member) {
    while (!dq.empty()) {
      std::uint64_t k = dq.front();
      dq.pop_front();
      if (member[k]) return std::make_pair(true, k);
    }
    return std::make_pair(false, std::uint64_t{0});
  };

  while (rep.epochs < epochs) {
    double next_expiry =
        expiry.empty() ? std::numeric_limits<double>::infinity() : expiry.top().first;
    double tn = std::min({next_arrival, next_service, next_expiry});
    t = tn;
    ++rep.epochs;

    if (tn == next_arrival) {
      std::uint64_t k = next_label++;
      in_jsq.push_back(1);
      in_ssq.push_back(1);
      in_mminf.push_back(1);
      double pat = -std::log(patience.u01_at(k)) / g;
      expiry.emplace(t + pat, k);
      int star = 0;
      for (int i = 1; i < n; ++i)
        if (jsq_len[i] < jsq_len[star]) star = i;
      jsq_queue_of.push_back(star);
      jsq_q[star].push_back(k);
      jsq_len[star] += 1;
      ssq_q.push_back(k);
      ssq_len += 1;
      mminf_len += 1;
      check_label(k, "arrival");
      next_arrival = t + arrivals.next_exp(lam);
    } else if (tn == next_expiry) {
      auto [te, k] = expiry.top();
      expiry.pop();
      (void)te;
      // patience fires for every system still holding the customer
      if (in_mminf[k]) {
        in_mminf[k] = 0;
        mminf_len -= 1;
      }
      if (in_jsq[k]) {
        in_jsq[k] = 0;
        jsq_len[jsq_queue_of[k]] -= 1;
      }
      if (in_ssq[k]) {
        in_ssq[k] = 0;
        ssq_len -= 1;
      }
      check_label(k, "abandonment");
    } else {
      // service event, split across servers by mu_i/mu
      double u = pick.next_u01() * mu;
      int srv = 0;
      for (int i = 0; i < n; ++i) {
        if (u < params.mus[i]) {
          srv = i;
          break;
        }
        u -= params.mus[i];
      }
      bool jsq_served = false;
      std::uint64_t served = 0;
      if (jsq_len[srv] > 0) {
        auto [ok, k] = serve_from_deque(jsq_q[srv], in_jsq);
        if (ok) {
          in_jsq[k] = 0;
          jsq_len[srv] -= 1;
          jsq_served = true;
          served = k;
        }
      }
      if (ssq_len > 0) {
        if (jsq_served && in_ssq[served]) {
          in_ssq[served] = 0;  // lazily dropped from the deque later
          ssq_len -= 1;
        } else {
          auto [ok, k] = serve_from_deque(ssq_q, in_ssq);
          if (ok) {
            in_ssq[k] = 0;
            ssq_len -= 1;
          }
        }
      }
      if (jsq_served) check_label(served, "service");
      next_service = t + service.next_exp(mu);
    }

    // periodic full inclusion scan
    if (rep.epochs % 8192 == 0 || rep.epochs == epochs) {
      for (std::uint64_t k = 0; k < in_mminf.size(); ++k) {
        if ((in_ssq[k] && !in_jsq[k]) || (in_jsq[k] && !in_mminf[k])) violation(k, "full-scan");
      }
    }
  }
  rep.final_ssq_size = static_cast<std::size_t>(ssq_len);
  rep.final_jsq_size = static_cast<std::size_t>(
      std::accumulate(jsq_len.begin(), jsq_len.end(), std::int64_t{0}));
  rep.final_mminf_size = static_cast<std::size_t>(mminf_len);
  return rep;
}

}  // namespace overq
