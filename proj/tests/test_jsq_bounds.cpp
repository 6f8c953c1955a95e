#include <doctest.h>

#include <cmath>
#include <vector>

#include "overq/jsq_bounds.hpp"
#include "overq/jsq_engine.hpp"
#include "overq/stein.hpp"
#include "overq/wasserstein.hpp"

using namespace overq;

namespace {
QueueParams two_server(double gamma) {
  return QueueParams::make(2, {0.5, 0.5}, gamma, 1.0, 0.0);
}
}  // namespace

TEST_CASE("jsq constants") {
  auto prm = two_server(0.2);
  auto t = jsq_constants(prm);
  CHECK(t.value("zeta") == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));  // 2/sqrt(2)
  CHECK(t.value("e_ssc") == doctest::Approx(std::max(t.value("e1"), t.value("e2"))).epsilon(1e-14));
  for (const auto& [name, lg] : t.log_values()) {
    INFO(name);
    CHECK(std::isfinite(lg));
  }
  // iota = min{1/3, 1/2 - alpha - eps}: with alpha=0, eps=0.1 it is 1/3
  auto t2 = jsq_constants(QueueParams::make(2, {0.5, 0.5}, 0.2, 1.0, 0.0, 0.1));
  CHECK(t2.value("iota") == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(jsq_constants(QueueParams::ssq(2, 1, 0.2)), std::invalid_argument);  // n=1 redirected
}

TEST_CASE("ssc bound shape") {
  auto prm = two_server(0.2);
  auto t = jsq_constants(prm);
  auto b1 = ssc_bound(prm, 1.0);
  CHECK(b1.upper == doctest::Approx(std::max(t.value("e1"), t.value("e2"))).epsilon(1e-12));
  CHECK(b1.lower == 0.0);
  auto b2 = ssc_bound(prm, 2.0);
  auto b4 = ssc_bound(prm, 4.0);
  CHECK(b4.upper / b2.upper <= 4.0 + 1e-12);  // the p^2 law
  // ssc(p)/p^2 nonincreasing beyond the branch crossover
  double prev = std::numeric_limits<double>::infinity();
  for (double p : {4.0, 8.0, 16.0, 32.0}) {
    double v = ssc_bound(prm, p).upper / (p * p);
    CHECK(v <= prev * (1.0 + 1e-12));
    prev = v;
  }
}

TEST_CASE("zero mass bounds") {
  auto prm = two_server(0.2);
  auto zm = zero_mass_bounds(prm);
  // exponential-in-1/sqrt(gamma) decay: two-point slope identity
  auto zm2 = zero_mass_bounds(two_server(0.05));
  double lhs = std::log(zm2.sum_zero.upper) - std::log(zm.sum_zero.upper);
  double slope = -prm.C * (prm.lambda - prm.mu()) / (2.0 * 2.0 * prm.lambda);
  double rhs = slope * (1.0 / std::sqrt(0.05) - 1.0 / std::sqrt(0.2));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(zm.all_zero.lower == doctest::Approx(std::exp(-prm.lambda / prm.gamma)).epsilon(1e-13));
  CHECK(zm.all_zero.lower <= zm.all_zero.upper);
  CHECK(zm.sum_zero.preconditions.count("theta_range_ok") == 1);
}

TEST_CASE("qsum bounds bracket the exact moments") {
  auto prm = two_server(0.2);
  auto joint = exact_stationary_small(prm, 60);
  for (double p : {2.0, 4.0}) {
    double exact = joint_qsum_hat_lp(prm, joint, p);
    auto b = qsum_moment_bounds(prm, p);
    CHECK(std::log(exact) <= b.log_upper);
    CHECK(b.log_lower <= std::log(exact));
    CHECK(b.aux.count("upper_sub_exponential") == 1);
    CHECK(b.aux.count("upper_sub_poisson") == 1);
  }
}

TEST_CASE("wp jsq regimes") {
  auto prm = two_server(1e-4);
  auto b = wp_jsq_bounds(prm, 2.0);
  CHECK(b.regime == Regime::kWp1);
  CHECK(std::isfinite(b.log_upper));
  auto b3 = wp_jsq_bounds(prm, 2e4);  // p >= 1/gamma
  CHECK(b3.regime == Regime::kWp3);
  CHECK(b3.log_upper > b.log_upper);
  CHECK_THROWS_AS(wp_jsq_bounds(prm, 1.0), std::domain_error);
}

TEST_CASE("jsq tail cases") {
  auto prm = two_server(0.2);
  const double inv = 1.0 / std::sqrt(2.0);

  // aligned direction, constant deviation
  std::vector<double> phi1 = {inv, inv};
  auto a1 = jsq_tail_bounds(prm, phi1, 1.0);
  CHECK(a1.regime == Regime::kConstantDev);
  CHECK(std::isfinite(a1.upper));
  CHECK(a1.aux.at("gaussian_ref") == doctest::Approx(0.2397500610934768).epsilon(1e-9));

  // moderate window engages at a = 2 for this direction
  auto a2 = jsq_tail_bounds(prm, phi1, 2.0);
  CHECK((a2.regime == Regime::kNearConstant || a2.regime == Regime::kLarge));

  // large deviation: no matching lower bound exists, flagged as open
  auto a3 = jsq_tail_bounds(prm, phi1, 50.0);
  CHECK(a3.regime == Regime::kLarge);
  CHECK(a3.lower == 0.0);
  CHECK(a3.aux.at("lower_open") == 1.0);

  // orthogonal direction: pure sub-Weibull with the closed-form exponent
  std::vector<double> orth = {inv, -inv};
  auto d = jsq_tail_bounds(prm, orth, 4.0);
  CHECK(d.aux.at("orthogonal") == 1.0);
  auto t = jsq_constants(prm);
  CHECK(d.log_upper ==
        doctest::Approx(-t.value("g_worst") * 2.0 / std::pow(0.2, 0.25)).epsilon(1e-12));
  CHECK(d.lower == 0.0);

  // nonnegative-direction refinement beats the sub-Weibull branch far out
  std::vector<double> e1 = {1.0, 0.0};
  double a_big = 2.718281828459045 * 2.718281828459045 * 2.0 * std::sqrt(2.0) / std::sqrt(0.2);
  auto ref = jsq_tail_bounds(prm, e1, 4.0 * a_big);
  REQUIRE(ref.aux.count("log_refinement") == 1);
  CHECK(ref.aux.at("log_refinement") < -t.value("c_subweibull") *
            std::pow(4.0 * a_big, ref.aux.at("subweibull_exponent")));
  CHECK(ref.log_upper <= ref.aux.at("log_refinement") + 1e-12);

  std::vector<double> bad = {1.0, 1.0};
  CHECK_THROWS_AS(jsq_tail_bounds(prm, bad, 1.0), std::invalid_argument);

  // delta entry point: a = gamma^{-delta}
  auto viaD = jsq_tail_bounds_delta(prm, phi1, 0.5);
  auto viaA = jsq_tail_bounds(prm, phi1, std::pow(0.2, -0.5));
  CHECK(viaD.upper == doctest::Approx(viaA.upper));
}

TEST_CASE("zero-mass upper degenerates to the Poisson exponent as mu -> 0") {
  auto prm = QueueParams::make(2, {5e-5, 5e-5}, 0.01, 1.0, 0.0);
  auto zm = zero_mass_bounds(prm);
  double log_up = std::log(zm.all_zero.upper);
  CHECK(std::fabs(log_up / (-prm.lambda / prm.gamma) - 1.0) <= 0.1);
}

TEST_CASE("jsq certificate stays above the numeric W_2 of the summed queue") {
  auto prm = two_server(0.2);
  auto joint = exact_stationary_small(prm, 60);
  auto marg = joint_sum_marginal(prm, joint);
  double w2 = wp_lattice_vs_gaussian(marg, 2.0).value;
  auto cert = certificate_bound_jsq(prm, 2.0, std::nullopt, 20, joint);
  CHECK(cert.upper >= w2);
  CHECK(cert.valid);
}

TEST_CASE("summed-queue W_2 shrinks with gamma") {
  double prev = std::numeric_limits<double>::infinity();
  for (double g : {0.5, 0.2}) {
    auto prm = two_server(g);
    auto joint = exact_stationary_small(prm, 60);
    auto marg = joint_sum_marginal(prm, joint);
    double w2 = wp_lattice_vs_gaussian(marg, 2.0).value;
    CHECK(w2 < prev);
    prev = w2;
  }
}

TEST_CASE("exact jsq quantities respect the brackets at desk scale") {
  for (double g : {1.0, 0.5, 0.2}) {
    auto prm = two_server(g);
    auto joint = exact_stationary_small(prm, 60);
    auto zm = zero_mass_bounds(prm);
    CHECK(joint_sum_p_qi_zero(joint) <= zm.sum_zero.upper);
    CHECK(joint_p_all_zero(joint) >= zm.all_zero.lower);
    CHECK(joint_p_all_zero(joint) <= zm.all_zero.upper);
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
      double exact_p = joint_qperp_moment(joint, p);  // E||q_perp||^p
      auto b = ssc_bound(prm, p);
      CHECK(exact_p <= std::pow(b.upper, p));
    }
  }
}
