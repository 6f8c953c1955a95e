#include "overq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "overq/constants.hpp"
#include "overq/gaussian.hpp"
#include "overq/jsq_bounds.hpp"
#include "overq/jsq_engine.hpp"
#include "overq/ssq_bounds.hpp"
#include "overq/ssq_exact.hpp"
#include "overq/stein.hpp"
#include "overq/wasserstein.hpp"

namespace overq {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// probability = true clamps the emitted bracket to [0,1] (vacuous bounds are
// first-class outputs; the raw formula values stay in extra).
void fill_bound(Row& row, const BoundReport& b, bool probability = false) {
  row.lower = b.lower;
  row.upper = b.upper;
  row.log_lower = b.log_lower;
  row.log_upper = b.log_upper;
  row.regime = to_string(b.regime);
  row.valid = b.valid ? 1 : 0;
  if (probability) {
    double cl = std::clamp(std::isnan(b.lower) ? 0.0 : b.lower, 0.0, 1.0);
    double cu = std::clamp(std::isnan(b.upper) ? 1.0 : b.upper, 0.0, 1.0);
    if (cl != b.lower) row.extra["raw_lower"] = b.lower;
    if (cu != b.upper) row.extra["raw_upper"] = b.upper;
    row.lower = cl;
    row.upper = cu;
  }
  for (const auto& [k, v] : b.preconditions) row.extra["pre_" + k] = v;
  for (const auto& [k, v] : b.aux) row.extra["aux_" + k] = v;
}

std::string phi_string(const std::vector<double>& phi) {
  std::string s;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (i) s += ",";
    s += fmt(phi[i]);
  }
  return s;
}

}  // namespace

nlohmann::ordered_json Row::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["model"] = model;
  auto put = [&](const char* k, double v) {
    if (!std::isnan(v)) j[k] = v;
  };
  put("gamma", gamma);
  put("a", a);
  put("p", p);
  put("theta", theta);
  put("delta", delta);
  put("D", D);
  if (!phi.empty()) j["phi"] = phi;
  put("truth", truth);
  put("truth_log", truth_log);
  put("truth_ci", truth_ci);
  put("lower", lower);
  put("upper", upper);
  put("log_lower", log_lower);
  put("log_upper", log_upper);
  if (!regime.empty()) j["regime"] = regime;
  if (valid >= 0) j["valid"] = valid;
  for (const auto& [k, v] : extra) put(k.c_str(), v);
  return j;
}

void SweepConfig::validate() const {
  if (model != "ssq" && model != "jsq") throw std::invalid_argument("config: model must be ssq|jsq");
  if (gamma_grid.empty()) throw std::invalid_argument("config: gamma_grid must be nonempty");
  if (outputs.empty()) throw std::invalid_argument("config: outputs must be nonempty");
  if (estimator != "exact" && estimator != "simulate")
    throw std::invalid_argument("config: estimator must be exact|simulate");
  if (estimator == "exact" && params.n() > 3)
    throw std::invalid_argument("config: exact estimator rejected for n > 3");
  for (const auto& k : outputs) {
    bool needs_a = (k == "tail" || k == "jsq_tail");
    bool needs_p =
        (k == "lp" || k == "wp_bound" || k == "wp_numeric" || k == "certify" || k == "ssc" || k == "qsum");
    if (needs_a && a_grid.empty() && delta_grid.empty())
      throw std::invalid_argument("config: kind '" + k + "' needs a_grid or delta_grid");
    if (needs_p && p_grid.empty()) throw std::invalid_argument("config: kind '" + k + "' needs p_grid");
    if (k == "mgf" && theta_grid.empty()) throw std::invalid_argument("config: mgf needs theta_grid");
    if (k == "jsq_tail" && phi_list.empty())
      throw std::invalid_argument("config: jsq_tail needs phi_list");
    if (k == "certify" && estimator != "exact")
      throw std::invalid_argument("config: certify needs the exact estimator");
  }
  if (model == "jsq" && params.n() < 1) throw std::invalid_argument("config: params.mus empty");
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  SweepConfig c;
  c.model = j.value("model", std::string("ssq"));
  c.params = QueueParams::from_json(j.at("params"));
  auto grab = [&](const char* key, std::vector<double>& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::vector<double>>();
  };
  grab("gamma_grid", c.gamma_grid);
  grab("a_grid", c.a_grid);
  grab("delta_grid", c.delta_grid);
  grab("d_grid", c.d_grid);
  grab("p_grid", c.p_grid);
  grab("theta_grid", c.theta_grid);
  if (j.contains("phi_list")) c.phi_list = j.at("phi_list").get<std::vector<std::vector<double>>>();
  if (j.contains("outputs")) c.outputs = j.at("outputs").get<std::vector<std::string>>();
  c.estimator = j.value("estimator", std::string("exact"));
  c.horizon = j.value("horizon", 2e5);
  c.burn_in = j.value("burn_in", 2e4);
  c.cap = j.value("cap", 60);
  c.tol = j.value("tol", 1e-12);
  c.seed = j.value("seed", std::uint64_t{0});
  c.format = j.value("format", std::string("csv"));
  c.strict_regime = j.value("strict_regime", false);
  return c;
}

namespace {

QueueParams with_gamma(const QueueParams& p, double gamma) {
  QueueParams q = p;
  q.gamma = gamma;
  return q;
}

void sweep_ssq_gamma(const SweepConfig& cfg, double gamma, std::vector<Row>& rows) {
  QueueParams prm = with_gamma(cfg.params, gamma);
  ConstantTable table = ssq_constants(prm);
  const double theta_need =
      cfg.theta_grid.empty() ? 0.0 : *std::max_element(cfg.theta_grid.begin(), cfg.theta_grid.end());
  LatticePmf pmf = stationary_pmf(prm, cfg.tol, theta_need);
  const double center = pmf.offset;

  for (const auto& kind : cfg.outputs) {
    if (kind == "p0") {
      Row r;
      r.kind = kind;
      r.model = "ssq";
      r.gamma = gamma;
      r.truth = prob_empty(pmf);
      r.truth_log = pmf.log_probs[0];
      fill_bound(r, p0_bounds(prm, table), /*probability=*/true);
      rows.push_back(std::move(r));
    } else if (kind == "lp") {
      for (double p : cfg.p_grid) {
        Row r;
        r.kind = kind;
        r.model = "ssq";
        r.gamma = gamma;
        r.p = p;
        r.truth = moment_lp(pmf, center, p);
        r.truth_log = std::log(r.truth);
        fill_bound(r, lp_norm_bounds(prm, table, p));
        rows.push_back(std::move(r));
      }
    } else if (kind == "mgf") {
      for (double theta : cfg.theta_grid) {
        Row r;
        r.kind = kind;
        r.model = "ssq";
        r.gamma = gamma;
        r.theta = theta;
        r.truth_log = mgf_log(pmf, theta, center);
        r.truth = std::exp(r.truth_log);
        fill_bound(r, mgf_envelope(prm, table, theta));
        rows.push_back(std::move(r));
      }
    } else if (kind == "wp_bound") {
      for (double p : cfg.p_grid) {
        Row r;
        r.kind = kind;
        r.model = "ssq";
        r.gamma = gamma;
        r.p = p;
        fill_bound(r, wp_bounds(prm, table, p));
        rows.push_back(std::move(r));
      }
    } else if (kind == "wp_numeric") {
      for (double p : cfg.p_grid) {
        Row r;
        r.kind = kind;
        r.model = "ssq";
        r.gamma = gamma;
        r.p = p;
        WpResult w = wp_lattice_vs_gaussian(pmf, p);
        r.truth = w.value;
        r.truth_log = std::log(w.value);
        r.extra["quad_error"] = w.quad_error;
        r.extra["endpoint_tail"] = w.endpoint_tail;
        if (p > 1.0) fill_bound(r, wp_bounds(prm, table, p));  // the bracket needs p > 1
        rows.push_back(std::move(r));
      }
    } else if (kind == "certify") {
      for (double p : cfg.p_grid) {
        Row r;
        r.kind = kind;
        r.model = "ssq";
        r.gamma = gamma;
        r.p = p;
        WpResult w = wp_lattice_vs_gaussian(pmf, p);
        r.truth = w.value;
        r.truth_log = std::log(w.value);
        fill_bound(r, certificate_bound(prm, p, std::nullopt, 25, pmf));
        rows.push_back(std::move(r));
      }
    } else if (kind == "tail") {
      std::vector<double> avals = cfg.a_grid;
      for (double delta : cfg.delta_grid)
        for (double D : cfg.d_grid) avals.push_back(D * std::pow(gamma, -delta));
      for (double a : avals) {
        Row r;
        r.kind = kind;
        r.model = "ssq";
        r.gamma = gamma;
        r.a = a;
        double thresh = pmf.offset + a / pmf.scale;
        r.truth_log = log_tail_raw(prm, thresh);
        r.truth = std::exp(r.truth_log);
        fill_bound(r, tail_bounds(prm, table, a), /*probability=*/true);
        rows.push_back(std::move(r));
      }
    } else {
      throw std::invalid_argument("run_sweep: unknown ssq kind '" + kind + "'");
    }
  }
}

void sweep_jsq_gamma(const SweepConfig& cfg, double gamma, std::vector<Row>& rows) {
  QueueParams prm = with_gamma(cfg.params, gamma);
  const bool exact = cfg.estimator == "exact";
  ConstantTable table = prm.n() >= 2 ? jsq_constants(prm) : ssq_constants(prm);

  JointPmf joint;
  std::map<std::string, SimEstimate> sims;
  if (exact) {
    joint = exact_stationary_small(prm, cfg.cap);
  } else {
    std::vector<std::string> keys = {"p0_sum", "p_all_zero"};
    for (double p : cfg.p_grid) {
      keys.push_back("qperp_moment:" + fmt(p));
      keys.push_back("qsum_hat_moment:" + fmt(p));
    }
    for (const auto& phi : cfg.phi_list)
      for (double a : cfg.a_grid) keys.push_back("proj_tail:" + fmt(a) + ":" + phi_string(phi));
    sims = simulate_stationary(prm, cfg.horizon, cfg.burn_in, cfg.seed, keys);
  }

  auto sim_truth = [&](Row& r, const std::string& key) {
    auto it = sims.find(key);
    if (it == sims.end()) return;
    r.truth = it->second.value;
    r.truth_ci = it->second.ci_halfwidth;
    r.extra["estimand_batches"] = static_cast<double>(it->second.batches);
    r.extra["seed"] = static_cast<double>(it->second.seed);
    r.extra["horizon"] = it->second.horizon;
    r.extra["burn_in"] = it->second.burn_in;
  };

  for (const auto& kind : cfg.outputs) {
    if (kind == "ssc") {
      for (double p : cfg.p_grid) {
        Row r;
        r.kind = kind;
        r.model = "jsq";
        r.gamma = gamma;
        r.p = p;
        if (exact) {
          r.truth = std::pow(joint_qperp_moment(joint, p), 1.0 / p);
          r.extra["leak"] = joint.leak;
        } else {
          sim_truth(r, "qperp_moment:" + fmt(p));
          if (!std::isnan(r.truth)) r.truth = std::pow(r.truth, 1.0 / p);
        }
        fill_bound(r, ssc_bound(prm, table, p));
        rows.push_back(std::move(r));
      }
    } else if (kind == "zero_mass_sum" || kind == "zero_mass_all") {
      ZeroMassBounds zm = zero_mass_bounds(prm, table);
      Row r;
      r.kind = kind;
      r.model = "jsq";
      r.gamma = gamma;
      if (kind == "zero_mass_sum") {
        if (exact)
          r.truth = joint_sum_p_qi_zero(joint);
        else
          sim_truth(r, "p0_sum");
        fill_bound(r, zm.sum_zero, /*probability=*/true);
      } else {
        if (exact)
          r.truth = joint_p_all_zero(joint);
        else
          sim_truth(r, "p_all_zero");
        fill_bound(r, zm.all_zero, /*probability=*/true);
      }
      rows.push_back(std::move(r));
    } else if (kind == "qsum") {
      for (double p : cfg.p_grid) {
        Row r;
        r.kind = kind;
        r.model = "jsq";
        r.gamma = gamma;
        r.p = p;
        if (exact) {
          r.truth = joint_qsum_hat_lp(prm, joint, p);
        } else {
          sim_truth(r, "qsum_hat_moment:" + fmt(p));
          if (!std::isnan(r.truth)) r.truth = std::pow(r.truth, 1.0 / p);
        }
        fill_bound(r, qsum_moment_bounds(prm, table, p));
        rows.push_back(std::move(r));
      }
    } else if (kind == "wp_bound" || kind == "wp_numeric") {
      for (double p : cfg.p_grid) {
        Row r;
        r.kind = kind;
        r.model = "jsq";
        r.gamma = gamma;
        r.p = p;
        if (kind == "wp_numeric" && exact) {
          LatticePmf marg = joint_sum_marginal(prm, joint);
          WpResult w = wp_lattice_vs_gaussian(marg, p);
          r.truth = w.value;
          r.extra["quad_error"] = w.quad_error;
        }
        if (p > 1.0) fill_bound(r, wp_jsq_bounds(prm, table, p));
        rows.push_back(std::move(r));
      }
    } else if (kind == "certify") {
      for (double p : cfg.p_grid) {
        Row r;
        r.kind = kind;
        r.model = "jsq";
        r.gamma = gamma;
        r.p = p;
        if (exact) {
          LatticePmf marg = joint_sum_marginal(prm, joint);
          WpResult w = wp_lattice_vs_gaussian(marg, p);
          r.truth = w.value;
          fill_bound(r, certificate_bound_jsq(prm, p, std::nullopt, 25, joint));
        }
        rows.push_back(std::move(r));
      }
    } else if (kind == "jsq_tail") {
      for (const auto& phi : cfg.phi_list) {
        for (double a : cfg.a_grid) {
          Row r;
          r.kind = kind;
          r.model = "jsq";
          r.gamma = gamma;
          r.a = a;
          r.phi = phi_string(phi);
          if (exact)
            r.truth = projected_tail(prm, joint, phi, a);
          else
            sim_truth(r, "proj_tail:" + fmt(a) + ":" + phi_string(phi));
          fill_bound(r, jsq_tail_bounds(prm, table, phi, a), /*probability=*/true);
          rows.push_back(std::move(r));
        }
      }
    } else {
      throw std::invalid_argument("run_sweep: unknown jsq kind '" + kind + "'");
    }
  }
}

}  // namespace

std::vector<Row> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<Row>> per_gamma(cfg.gamma_grid.size());
  // grid points evaluated concurrently; rows reduced in grid order
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(cfg.gamma_grid.size());
  auto work = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= cfg.gamma_grid.size()) return;
      try {
        if (cfg.model == "ssq")
          sweep_ssq_gamma(cfg, cfg.gamma_grid[i], per_gamma[i]);
        else
          sweep_jsq_gamma(cfg, cfg.gamma_grid[i], per_gamma[i]);
      } catch (const std::exception& e) {
        errors[i] = "gamma=" + fmt(cfg.gamma_grid[i]) + ": " + e.what();
      }
    }
  };
  unsigned workers = std::min<unsigned>(hw, cfg.gamma_grid.size());
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error("run_sweep failed at grid point " + err);

  std::vector<Row> rows;
  for (auto& chunk : per_gamma)
    for (auto& r : chunk) rows.push_back(std::move(r));
  return rows;
}

std::vector<Row> phase_diagram(const SweepConfig& cfg) {
  if (cfg.model != "ssq" || cfg.estimator != "exact")
    throw std::invalid_argument("phase_diagram: model=ssq with the exact estimator only");
  if (cfg.delta_grid.empty() || cfg.gamma_grid.empty())
    throw std::invalid_argument("phase_diagram: needs delta_grid and gamma_grid");
  std::vector<Row> rows;
  for (double delta : cfg.delta_grid) {
    for (double D : cfg.d_grid) {
      for (double gamma : cfg.gamma_grid) {
        QueueParams prm = with_gamma(cfg.params, gamma);
        ConstantTable table = ssq_constants(prm);
        const double a = D * std::pow(gamma, -delta);
        const double scale = std::sqrt(gamma / prm.lambda);
        const double offset = (prm.lambda - prm.mu()) / gamma;
        const double log_tail = log_tail_raw(prm, offset + a / scale);

        Row r;
        r.kind = "phase";
        r.model = "ssq";
        r.gamma = gamma;
        r.delta = delta;
        r.D = D;
        r.a = a;
        r.truth_log = log_tail;
        r.truth = std::exp(log_tail);
        double ratio, normalizer;
        if (delta == 0.0) {
          normalizer = 1.0;
          ratio = std::exp(log_tail - std_normal_log_ccdf(a));
        } else if (delta <= 0.5) {
          normalizer = 0.5 * a * a;
          ratio = -log_tail / normalizer;
        } else {
          normalizer = std::sqrt(prm.lambda / gamma) * a *
                       std::log1p(a * std::sqrt(gamma / prm.lambda));
          ratio = -log_tail / normalizer;
        }
        r.extra["empirical_exponent"] = ratio;
        r.extra["normalizer"] = normalizer;
        BoundReport b = tail_bounds(prm, table, a);
        r.log_lower = b.log_lower;
        r.log_upper = b.log_upper;
        r.valid = b.valid ? 1 : 0;
        r.regime = to_string(b.regime);
        if (delta > 0.0) {
          // the figure compares against the transform-route pair, which stays
          // meaningful outside the certified gamma range
          double lu = std::min({b.aux.at("log_upper_transform"),
                                b.aux.at("log_upper_wass_moderate"),
                                b.aux.at("log_upper_wass_large")});
          double ll = std::max(b.aux.at("log_lower_moderate"), b.aux.at("log_lower_large"));
          r.extra["bound_exponent_upper"] = -lu / normalizer;
          r.extra["bound_exponent_lower"] = -ll / normalizer;
        }
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

namespace {

const char* kCsvHeader =
    "kind,model,gamma,a,p,theta,delta,D,phi,truth,truth_log,truth_ci,lower,upper,log_lower,"
    "log_upper,regime,valid,extra";

std::string csv_escape(const std::string& s) {
  if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string emit_string(const std::vector<Row>& rows, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) arr.push_back(r.to_json());
    return arr.dump(1) + "\n";
  }
  if (format != "csv") throw std::invalid_argument("emit: format must be csv|json");
  std::string out = kCsvHeader;
  out += "\n";
  for (const auto& r : rows) {
    std::string extra;
    for (const auto& [k, v] : r.extra) {
      if (!extra.empty()) extra += ";";
      extra += k + "=" + fmt(v);
    }
    out += r.kind + "," + r.model + "," + fmt(r.gamma) + "," + fmt(r.a) + "," + fmt(r.p) + "," +
           fmt(r.theta) + "," + fmt(r.delta) + "," + fmt(r.D) + "," + csv_escape(r.phi) + "," +
           fmt(r.truth) + "," + fmt(r.truth_log) + "," + fmt(r.truth_ci) + "," + fmt(r.lower) +
           "," + fmt(r.upper) + "," + fmt(r.log_lower) + "," + fmt(r.log_upper) + "," + r.regime +
           "," + (r.valid < 0 ? "" : std::to_string(r.valid)) + "," + csv_escape(extra) + "\n";
  }
  return out;
}

void emit(const std::vector<Row>& rows, const std::string& format, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("emit: cannot open " + path);
  f << emit_string(rows, format);
  if (!f) throw std::runtime_error("emit: write failed for " + path);
}

bool strict_regime_violation(const std::vector<Row>& rows) {
  for (const auto& r : rows) {
    if (r.valid == 0) return true;
    if (r.valid == 1 && !std::isnan(r.truth)) {
      if ((!std::isnan(r.lower) && r.truth < r.lower) ||
          (!std::isnan(r.upper) && r.truth > r.upper))
        return true;
    }
  }
  return false;
}

}  // namespace overq
