// Command-line front door: parameter sweeps, bound-vs-truth tables,
// phase-diagram data, Wasserstein and certificate evaluation.
//
// Exit codes: 0 success, 2 validation error, 3 sandwich violation under
// --strict-regime.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "overq/constants.hpp"
#include "overq/harness.hpp"
#include "overq/jsq_engine.hpp"
#include "overq/ssq_exact.hpp"
#include "overq/stein.hpp"
#include "overq/wasserstein.hpp"

using namespace overq;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string format = "csv";
  std::string out_path;
  std::uint64_t seed = 0;
  bool strict = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", o.out_path, "output path (default stdout)");
  cmd->add_option("--seed", o.seed, "64-bit seed");
  cmd->add_flag("--strict-regime", o.strict, "exit 3 when a consumed bound is invalid or violated");
}

SweepConfig load_config(const CommonOpts& o, const std::string& default_model) {
  SweepConfig cfg;
  if (!o.config_path.empty()) {
    std::ifstream f(o.config_path);
    if (!f) throw std::invalid_argument("cannot open config " + o.config_path);
    nlohmann::json j;
    f >> j;
    cfg = SweepConfig::from_json(j);
  } else {
    throw std::invalid_argument("--config <path> is required for this subcommand");
  }
  if (cfg.model.empty()) cfg.model = default_model;
  cfg.format = o.format;
  if (o.seed != 0) cfg.seed = o.seed;
  cfg.strict_regime = cfg.strict_regime || o.strict;
  return cfg;
}

int finish(const std::vector<Row>& rows, const SweepConfig& cfg, const CommonOpts& o) {
  std::string text = emit_string(rows, cfg.format);
  if (o.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out_path, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + o.out_path);
  }
  if (cfg.strict_regime && strict_regime_violation(rows)) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"overq: verification harness for heavily overloaded abandonment queues"};
  app.require_subcommand(1);

  CommonOpts o_exact, o_bounds, o_solve, o_sim, o_wp, o_cert, o_sweep, o_phase;

  auto* c_exact = app.add_subcommand("ssq-exact", "exact M/M/1+M stationary quantities");
  add_common(c_exact, o_exact);
  auto* c_bounds = app.add_subcommand("ssq-bounds", "closed-form SSQ bounds vs exact truth");
  add_common(c_bounds, o_bounds);
  auto* c_solve = app.add_subcommand("jsq-solve", "truncated exact JSQ solve with bounds");
  add_common(c_solve, o_solve);
  std::string dump_joint_path;
  c_solve->add_option("--dump-joint", dump_joint_path,
                      "also write the solved joint law (first grid gamma) as sparse JSON triplets");
  auto* c_sim = app.add_subcommand("jsq-sim", "event-driven JSQ simulation with bounds");
  add_common(c_sim, o_sim);
  auto* c_wp = app.add_subcommand("wp", "numeric quantile-coupling Wasserstein distances");
  add_common(c_wp, o_wp);
  auto* c_cert = app.add_subcommand("certify", "Stein generator-comparison certificate");
  add_common(c_cert, o_cert);
  auto* c_sweep = app.add_subcommand("sweep", "general sweep from a config file");
  add_common(c_sweep, o_sweep);
  auto* c_phase = app.add_subcommand("phase", "phase-diagram exponent ratios");
  add_common(c_phase, o_phase);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_sweep) {
      SweepConfig cfg = load_config(o_sweep, "ssq");
      return finish(run_sweep(cfg), cfg, o_sweep);
    }
    if (*c_phase) {
      SweepConfig cfg = load_config(o_phase, "ssq");
      if (cfg.outputs.empty()) cfg.outputs = {"tail"};
      return finish(phase_diagram(cfg), cfg, o_phase);
    }
    auto run_fixed = [&](const CommonOpts& o, const char* model,
                         std::vector<std::string> kinds, const char* estimator) {
      SweepConfig cfg = load_config(o, model);
      cfg.model = model;
      if (cfg.outputs.empty()) cfg.outputs = std::move(kinds);
      cfg.estimator = estimator;
      return finish(run_sweep(cfg), cfg, o);
    };
    if (*c_solve && !dump_joint_path.empty()) {
      SweepConfig cfg = load_config(o_solve, "jsq");
      QueueParams prm = cfg.params;
      prm.gamma = cfg.gamma_grid.front();
      auto joint = exact_stationary_small(prm, cfg.cap);
      std::ofstream f(dump_joint_path, std::ios::binary);
      f << joint.to_json_sparse(0.0).dump(1) << "\n";
      if (!f) throw std::runtime_error("write failed: " + dump_joint_path);
    }
    if (*c_exact) return run_fixed(o_exact, "ssq", {"p0", "lp", "mgf"}, "exact");
    if (*c_bounds) return run_fixed(o_bounds, "ssq", {"p0", "lp", "mgf", "wp_bound", "tail"}, "exact");
    if (*c_solve) return run_fixed(o_solve, "jsq", {"ssc", "zero_mass_sum", "zero_mass_all", "qsum"}, "exact");
    if (*c_sim) return run_fixed(o_sim, "jsq", {"ssc", "zero_mass_sum", "zero_mass_all", "qsum"}, "simulate");
    if (*c_wp) return run_fixed(o_wp, "ssq", {"wp_numeric"}, "exact");
    if (*c_cert) return run_fixed(o_cert, "ssq", {"certify"}, "exact");
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
