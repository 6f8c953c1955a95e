#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "overq/ssq_bounds.hpp"
#include "overq/ssq_exact.hpp"

using namespace overq;

TEST_CASE("constants closed forms") {
  auto t = ssq_constants(QueueParams::ssq(2, 1, 0.1, 1.5, 0.0));
  CHECK(t.value("c_prime") == doctest::Approx(2.0 * (2.5 * 3.5 / 2.75)).epsilon(1e-14));
  CHECK(t.value("d_prime") ==
        doctest::Approx(1.0 / (2.0 + 2.0 * 2.718281828459045 * std::sqrt(3.141592653589793)))
            .epsilon(1e-13));
  CHECK(t.value("a_mgf") == doctest::Approx(9.99954085146515).epsilon(1e-12));
  // at C=1 the non-e branch of C' is (2)(3)/1 = 6
  auto t1 = ssq_constants(QueueParams::ssq(2, 1, 0.1, 1.0, 0.0));
  CHECK(t1.value("c_prime") == doctest::Approx(12.0).epsilon(1e-14));
  // every table entry has a finite log
  for (const auto& [name, lg] : t.log_values()) {
    INFO(name);
    CHECK(std::isfinite(lg));
  }
  // an exponent-degenerate (alpha, epsilon) pair never reaches the table: the
  // parameter invariant 0 < epsilon < 1/2 - alpha already rejects it
  CHECK_THROWS_AS(QueueParams::ssq(2, 1, 0.1, 1.5, 0.45, 0.0501), std::invalid_argument);
}

TEST_CASE("p0 bounds") {
  auto prm = QueueParams::ssq(2, 1, 0.1, 1.5, 0.0);
  auto b = p0_bounds(prm);
  CHECK(b.aux.at("exponent") == doctest::Approx((1.0 - std::log(2.0)) / 0.1).epsilon(1e-13));
  auto t = ssq_constants(prm);
  CHECK(b.upper ==
        doctest::Approx(t.value("c_prime") * std::sqrt(0.1) * std::exp(-3.0685281944005464))
            .epsilon(1e-12));
  CHECK(b.lower <= b.upper);
  // lambda = mu degenerates the exponent; the regime flag must trip
  auto eq = p0_bounds(QueueParams::ssq(1, 1, 0.1, 1.5, 0.0));
  CHECK(eq.aux.at("exponent") == doctest::Approx(0.0));
  CHECK(eq.lower == doctest::Approx(ssq_constants(QueueParams::ssq(1, 1, 0.1, 1.5, 0.0)).value("d_prime") *
                                    std::sqrt(0.1)));
  CHECK_FALSE(eq.valid);
  // exact value sits inside the bracket
  double p0 = prob_empty(stationary_pmf(prm, 1e-12));
  CHECK(b.lower <= p0);
  CHECK(p0 <= b.upper);
}

TEST_CASE("bound reports serialize to flat records") {
  auto b = p0_bounds(QueueParams::ssq(2, 1, 0.1, 1.5, 0.0));
  auto j = b.to_json();
  CHECK(j.at("lower").get<double>() == b.lower);
  CHECK(j.at("upper").get<double>() == b.upper);
  CHECK(j.at("regime").get<std::string>() == "constant");
  CHECK(j.contains("pre_overload_ok"));
  CHECK(j.contains("aux_exponent"));
  CHECK(j.contains("const_c_prime"));
  for (const auto& [k, v] : j.items()) CHECK(!v.is_structured());  // flat
}

TEST_CASE("lp norm bounds sandwich the exact moments") {
  auto prm = QueueParams::ssq(2, 1, 0.01, 1.0, 0.0);
  auto pmf = stationary_pmf(prm, 1e-12);
  for (double p : {2.0, 200.0}) {
    auto b = lp_norm_bounds(prm, p);
    double exact = moment_lp(pmf, pmf.offset, p);
    CHECK(std::log(exact) <= b.log_upper);
    CHECK(b.log_lower <= std::log(exact));
  }
  // large p: the sub-Poisson branch drives both sides, ratio upper/lower finite
  auto b = lp_norm_bounds(prm, 400.0);
  CHECK(std::isfinite(b.log_upper - b.log_lower));
}

TEST_CASE("mgf envelope") {
  auto prm = QueueParams::ssq(2, 1, 0.1, 1.5, 0.0);
  auto b0 = mgf_envelope(prm, 0.0);
  CHECK(b0.log_lower == doctest::Approx(0.0));
  CHECK(b0.log_upper == doctest::Approx(std::log(9.99954085146515)).epsilon(1e-12));
  auto pmf = stationary_pmf(prm, 1e-12, 0.5);
  double exact = mgf_log(pmf, 0.5, pmf.offset);
  auto b = mgf_envelope(prm, 0.5);
  CHECK(b.log_lower <= exact + 1e-12);
  CHECK(exact <= b.log_upper);
  // mu = 0 Poisson chain: the exact MGF *is* the lower envelope
  auto prmz = QueueParams::ssq(2, 0, 0.5);
  auto pz = stationary_pmf(prmz, 1e-12, 0.5);
  double lhs = mgf_log(pz, 0.5, 4.0);
  CHECK(lhs == doctest::Approx(4.0 * (std::exp(0.5) - 1.5)).epsilon(1e-10));
  CHECK_THROWS_AS(mgf_envelope(prm, -0.1), std::domain_error);
}

TEST_CASE("wp bound regimes") {
  auto prm = QueueParams::ssq(2, 1, 1e-4, 1.0, 0.0);
  auto t = ssq_constants(prm);
  auto b = wp_bounds(prm, 2.0);
  CHECK(b.regime == Regime::kWp1);  // 2 <= gamma^{-(1-2 eps)}
  CHECK(b.log_upper ==
        doctest::Approx(t.log_value("d1") + std::log(2.0) + 0.5 * std::log(1e-4)).epsilon(1e-12));
  // the regime-3 membership threshold D4/gamma is astronomically small at
  // these parameters, so the membership flag is on for any p; the regime-3
  // formula value is still reported
  CHECK(b.aux.at("member_wp3") == 1.0);
  CHECK(std::isfinite(b.aux.at("log_upper_wp3")));
  CHECK(b.lower >= 0.0);
  CHECK_THROWS_AS(wp_bounds(prm, 1.0), std::domain_error);
}

TEST_CASE("tail bound branches and identities") {
  auto prm = QueueParams::ssq(2, 1, 0.01, 1.0, 0.0);
  auto t = ssq_constants(prm);
  for (double a : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    auto b = tail_bounds(prm, a);
    CHECK(std::isfinite(b.log_upper));
    CHECK(b.log_lower < b.log_upper);
    CHECK(std::isfinite(b.aux.at("log_upper_transform")));
    CHECK(std::isfinite(b.aux.at("log_lower_large")));
    CHECK(std::isfinite(b.aux.at("delta_shift")));
    CHECK(std::isfinite(b.aux.at("theta_star")));
  }
  // transform route minus the envelope factor A is exactly the Poisson
  // Chernoff exponent at (lambda, gamma)
  double a = 3.0;
  double b_pois = 2.0 / 0.01;
  double ap = a * std::sqrt(b_pois);
  double chernoff = ap - (b_pois + ap) * std::log1p(ap / b_pois);
  CHECK(transform_upper_log(prm, t, a) - t.log_value("a_mgf") ==
        doctest::Approx(chernoff).epsilon(1e-12));
  // the closed-form theta is the exact minimizer of the Chernoff form
  CHECK(transform_upper_optimized_log(prm, t, a) ==
        doctest::Approx(transform_upper_log(prm, t, a)).epsilon(1e-9));
  CHECK_THROWS_AS(tail_bounds(prm, 0.0), std::domain_error);
}

TEST_CASE("tail bound sandwich against the exact law where it already holds") {
  // The certified ranges need astronomically small gamma, but the transform
  // upper and the large-regime lower already hold numerically at desk scale;
  // regression-check that observation.
  auto prm = QueueParams::ssq(2, 1, 0.01, 1.0, 0.0);
  for (double a : {1.0, 2.0, 5.0, 12.0}) {
    auto b = tail_bounds(prm, a);
    double lt = log_tail_raw(prm, 100.0 + a / std::sqrt(0.005));
    CHECK(lt <= b.aux.at("log_upper_transform"));
    CHECK(b.aux.at("log_lower_large") <= lt);
  }
}
