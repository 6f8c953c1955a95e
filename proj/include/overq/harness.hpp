#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "overq/model.hpp"

namespace overq {

// One result row: fixed identity columns plus the flattened bound report.
struct Row {
  std::string kind;
  std::string model;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double a = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double D = std::numeric_limits<double>::quiet_NaN();
  std::string phi;
  double truth = std::numeric_limits<double>::quiet_NaN();
  double truth_log = std::numeric_limits<double>::quiet_NaN();
  double truth_ci = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double log_lower = std::numeric_limits<double>::quiet_NaN();
  double log_upper = std::numeric_limits<double>::quiet_NaN();
  std::string regime;
  int valid = -1;  // -1: not a bound row
  std::map<std::string, double> extra;

  nlohmann::ordered_json to_json() const;
};

struct SweepConfig {
  std::string model = "ssq";  // "ssq" | "jsq"
  QueueParams params;         // gamma is overridden by the grid
  std::vector<double> gamma_grid;
  std::vector<double> a_grid;
  std::vector<double> delta_grid;
  std::vector<double> d_grid{1.0};  // a = D / gamma^delta
  std::vector<double> p_grid;
  std::vector<double> theta_grid;
  std::vector<std::vector<double>> phi_list;
  std::vector<std::string> outputs;  // report kinds, see run_sweep
  std::string estimator = "exact";   // "exact" | "simulate"
  double horizon = 2e5;
  double burn_in = 2e4;
  int cap = 60;
  double tol = 1e-12;
  std::uint64_t seed = 0;
  std::string format = "csv";  // "csv" | "json"
  bool strict_regime = false;

  void validate() const;  // throws std::invalid_argument
  static SweepConfig from_json(const nlohmann::json& j);
};

// One row per (grid point x report kind), deterministic order. Kinds:
//   ssq: p0 | lp | mgf | wp_bound | tail | wp_numeric | certify
//   jsq: ssc | zero_mass_sum | zero_mass_all | qsum | wp_bound | jsq_tail |
//        wp_numeric | certify
// Exact truth columns come from the stationary solves; "simulate" fills them
// from the event-driven simulator with CI columns.
std::vector<Row> run_sweep(const SweepConfig& config);

// Figure-style phase-diagram data: per (delta, D, gamma), the exact tail at
// a = D/gamma^delta and the per-regime normalized exponent ratio
// (-(log tail)/(a^2/2) for delta <= 1/2, Poisson normalization beyond),
// plus the same normalization applied to the transform-route bound pair.
std::vector<Row> phase_diagram(const SweepConfig& config);

// Stable-header CSV (shortest round-trip doubles, no locale) or a JSON array.
void emit(const std::vector<Row>& rows, const std::string& format, const std::string& path);
std::string emit_string(const std::vector<Row>& rows, const std::string& format);

// Strict-regime scan: true when some row with a bound has valid == false, or
// truth escapes [lower, upper] on a valid row.
bool strict_regime_violation(const std::vector<Row>& rows);

}  // namespace overq
