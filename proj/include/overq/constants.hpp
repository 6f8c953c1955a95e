#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "overq/model.hpp"

namespace overq {

// Every named constant of the single-server bounds, evaluated for one
// parameter set. Values are kept as logarithms: several of the closed forms
// (D5, the regime-(a) band constant, the L^p lower-bound prefactor) leave
// double range at ordinary parameters, so the log is the representation on
// which the "finite" invariant is enforced. value() may round to 0 or inf.
class ConstantTable {
 public:
  double log_value(const std::string& name) const;
  double value(const std::string& name) const;
  bool has(const std::string& name) const { return log_vals_.count(name) > 0; }
  void set_log(const std::string& name, double log_v);

  const std::map<std::string, double>& log_values() const { return log_vals_; }
  // (C, alpha, epsilon) the table was built with.
  double C = 0.0, alpha = 0.0, epsilon = 0.0;

  nlohmann::json to_json() const;

 private:
  std::map<std::string, double> log_vals_;
};

// SSQ constants. Keys:
//   c_prime d_prime a_mgf a_gen c1..c5 c1p..c7p c_quantile
//   d1 d2 d3 d4 d5 d4p d1p_tail
//   d_tail_2l d_tail_2u d_tail_3l d_tail_3u d_tail_4l
//   gamma0 gamma_a1 (gamma_a evaluated at deviation a = 1)
// Throws std::domain_error when 1/2 - alpha - epsilon <= 0.
ConstantTable ssq_constants(const QueueParams& params);

// Individual gamma_0 terms (name -> log value); the threshold is their min.
std::vector<std::pair<std::string, double>> gamma0_terms(const QueueParams& params);

// gamma_a threshold of the constant-deviation tail band, as a function of the
// deviation a. Terms that degenerate to zero at alpha = 0 are evaluated with
// alpha replaced by epsilon, which is the same logarithm-vs-polynomial trade
// the proofs make; the table stays positive that way.
double log_gamma_a(const QueueParams& params, const ConstantTable& t, double a);

// JSQ constants (n >= 2; n == 1 callers should use ssq_constants). Keys:
//   zeta a_jsq_mgf c_jsq_prime c_jsq_pprime
//   a1 a1p a2 a2p a2pp e1 e2 e_ssc e_wp b1 b2 iota c_subweibull g_worst
//   c_ot_prime e_tail_1u (at phi = 1/sqrt(n)) e_tail_2u
//   gamma1 gamma2 (at phi = 1/sqrt(n))
ConstantTable jsq_constants(const QueueParams& params);

enum class Regime {
  kNone,
  kConstantDev,
  kNearConstant,
  kModerate,
  kLarge,
  kWp1,
  kWp2,
  kWp3,
};
const char* to_string(Regime r);

// One bound evaluation. lower/upper are plain doubles (0 / +-inf are
// legitimate after rounding); log_lower/log_upper carry the same numbers
// without underflow. Raw formula values are never clamped here; clamping to
// [0,1] happens at the reporting layer with the raw value preserved in aux.
struct BoundReport {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double log_lower = -std::numeric_limits<double>::infinity();
  double log_upper = std::numeric_limits<double>::infinity();
  Regime regime = Regime::kNone;
  bool valid = false;
  std::map<std::string, double> preconditions;
  std::map<std::string, double> constants_used;  // log values
  std::map<std::string, double> aux;

  void set_lower_log(double lg);
  void set_upper_log(double lg);
  void set_lower(double v);
  void set_upper(double v);

  nlohmann::json to_json() const;  // flat record
};

}  // namespace overq
