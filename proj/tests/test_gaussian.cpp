#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <stdexcept>

#include "overq/gaussian.hpp"

using namespace overq;

TEST_CASE("ccdf basics") {
  CHECK(std_normal_ccdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std_normal_ccdf(1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-13));
  CHECK(std_normal_ccdf(1e10) == 0.0);
  CHECK(std_normal_ccdf(-40.0) == doctest::Approx(1.0));
}

TEST_CASE("ccdf symmetry to 1e-14") {
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    CHECK(std::fabs(std_normal_ccdf(x) + std_normal_ccdf(-x) - 1.0) <= 1e-14);
  }
}

TEST_CASE("log ccdf far tail") {
  // against the first asymptotic term, relative tolerance loose on purpose
  double x = 50.0;
  double approx = -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * 3.141592653589793);
  CHECK(std_normal_log_ccdf(x) == doctest::Approx(approx).epsilon(1e-3));
  CHECK(std_normal_log_ccdf(1.0) == doctest::Approx(std::log(0.15865525393145707)).epsilon(1e-12));
}

TEST_CASE("quantile") {
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std_normal_quantile(0.158655254) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK_THROWS_AS(std_normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(std_normal_quantile(1.0), std::domain_error);
  // monotone divergence toward 0+
  double prev = 0.0;
  for (double u = 1e-2; u >= 1e-300; u *= 1e-30) {
    double x = std_normal_quantile(u);
    CHECK(x < prev);
    prev = x;
  }
  CHECK(std_normal_quantile(1e-300) < -36.0);
}

TEST_CASE("quantile round trip over [-6,6]") {
  // u near 1 cannot hold the tail in double, so the x > 0 half round-trips
  // through the mirrored lower tail where u keeps full relative precision
  for (double x = -6.0; x <= 6.0; x += 0.2) {
    double xr = (x <= 0.0) ? std_normal_quantile(std_normal_cdf(x))
                           : -std_normal_quantile(std_normal_cdf(-x));
    CHECK(std::fabs(xr - x) <= 1e-10 * (1.0 + std::fabs(x)));
  }
  // |Phi(result) - u| <= 1e-12 on a log-spaced grid
  for (double u = 1e-12; u < 1.0; u *= 13.7) {
    double x = std_normal_quantile(u);
    CHECK(std::fabs(std_normal_cdf(x) - u) <= 1e-12);
  }
}

TEST_CASE("mills bracket") {
  auto m1 = mills_bracket(1.0);
  CHECK(m1.lower == doctest::Approx(105.0 / 201.0).epsilon(1e-15));
  CHECK(m1.upper == doctest::Approx(44.0 / 63.0).epsilon(1e-15));
  auto m0 = mills_bracket(0.0);
  CHECK(m0.lower == doctest::Approx(105.0 / 91.0).epsilon(1e-15));
  CHECK(m0.upper == doctest::Approx(44.0 / 35.0).epsilon(1e-15));
  auto m10 = mills_bracket(10.0);
  CHECK(m10.lower == doctest::Approx(105.0 / 1191.0).epsilon(1e-15));
  CHECK(m10.upper == doctest::Approx(44.0 / 315.0).epsilon(1e-15));
  CHECK_THROWS_AS(mills_bracket(-0.1), std::domain_error);
  for (double a : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    double scaled = std::sqrt(2.0 * 3.141592653589793) * std::exp(0.5 * a * a) * std_normal_ccdf(a);
    auto m = mills_bracket(a);
    CHECK(m.lower <= scaled);
    CHECK(scaled <= m.upper);
  }
}

TEST_CASE("gaussian Lp norm") {
  CHECK(gaussian_lp_norm(2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gaussian_lp_norm(1.0) == doctest::Approx(std::sqrt(2.0 / 3.141592653589793)).epsilon(1e-14));
  CHECK(gaussian_lp_norm(4.0) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_lp_norm(0.5), std::domain_error);
  for (double p = 1.0; p <= 200.0; p += 7.3) {
    CHECK(gaussian_lp_norm(p) <=
          2.0 * 2.718281828459045 * std::sqrt(2.0 * 3.141592653589793) * std::sqrt(p));
  }
}

TEST_CASE("hermite Lp bound") {
  CHECK(hermite_lp_bound(0, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hermite_lp_bound(1, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(hermite_lp_bound(1, 2.0) >= gaussian_lp_norm(2.0));  // bound dominates exact ||Z||_2
  CHECK(hermite_lp_bound(3, 2.0) == doctest::Approx(std::pow(2.0, 1.5) * std::sqrt(6.0)).epsilon(1e-14));
}
