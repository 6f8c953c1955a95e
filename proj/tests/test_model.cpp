#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "overq/model.hpp"
#include "overq/rng.hpp"

using namespace overq;

TEST_CASE("params validation") {
  CHECK_THROWS_AS(QueueParams::ssq(-1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(QueueParams::ssq(1, 1, -1), std::invalid_argument);
  CHECK_THROWS_AS(QueueParams::ssq(1, 1, 1, 1.0, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(QueueParams::ssq(1, 1, 1, 1.0, 0.0, 0.7), std::invalid_argument);
  auto p = QueueParams::ssq(2, 1, 0.1);
  CHECK(p.epsilon == doctest::Approx(0.05));  // default 0.1*(1/2 - alpha)
  auto pz = QueueParams::ssq(1, 0, 1);        // degenerate mu = 0 comparison chain
  CHECK(pz.mu() == 0.0);
}

TEST_CASE("json round trip and scalar mus") {
  auto p = QueueParams::make(2, {0.5, 0.5}, 0.2, 1.0, 0.0);
  auto q = QueueParams::from_json(p.to_json());
  CHECK(q.lambda == p.lambda);
  CHECK(q.mus == p.mus);
  CHECK(q.gamma == p.gamma);
  CHECK(q.epsilon == p.epsilon);
  auto s = QueueParams::from_json(nlohmann::json{{"lambda", 2.0}, {"mus", 1.0}, {"gamma", 0.5}});
  CHECK(s.n() == 1);
}

TEST_CASE("validate_regime overload condition") {
  auto rc1 = validate_regime(QueueParams::ssq(2, 1, 0.01, 1.0, 0.0));
  CHECK(rc1.overload_ok);  // 1 >= 1
  auto rc2 = validate_regime(QueueParams::ssq(1.05, 1, 0.01, 1.0, 0.0));
  CHECK_FALSE(rc2.overload_ok);  // 0.05 < 1
  auto rc3 = validate_regime(QueueParams::ssq(2, 1, 0.0001, 1.5, 0.25));
  CHECK(rc3.overload_ok);  // 1 >= 1.5 * 0.0001^{0.25} = 0.15
  CHECK(rc3.details.at("overload_rhs") == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(rc1.gamma0 > 0.0);
  CHECK(rc1.details.count("gamma0_2ed1_pow") == 1);
}

TEST_CASE("gamma0 monotone in the C'-laden constants") {
  // C' drops from 12 (C=1) to ~6.36 (C=1.5); smaller constants widen gamma0
  auto g0_c1 = validate_regime(QueueParams::ssq(2, 1, 0.01, 1.0, 0.0)).gamma0;
  auto g0_c15 = validate_regime(QueueParams::ssq(2, 1, 0.01, 1.5, 0.0)).gamma0;
  CHECK(g0_c1 <= g0_c15);
}

TEST_CASE("ssq rates") {
  auto p = QueueParams::ssq(2, 1, 1);
  auto r0 = ssq_rates(p, 0);
  REQUIRE(r0.size() == 1);
  CHECK(r0[0].target == 1);
  CHECK(r0[0].rate == 2.0);
  auto r3 = ssq_rates(p, 3);
  REQUIRE(r3.size() == 2);
  CHECK(r3[0].target == 4);
  CHECK(r3[0].rate == 2.0);
  CHECK(r3[1].target == 2);
  CHECK(r3[1].rate == 4.0);
  auto pz = QueueParams::ssq(1, 0, 0.5);
  auto r1 = ssq_rates(pz, 1);
  REQUIRE(r1.size() == 2);
  CHECK(r1[1].target == 0);
  CHECK(r1[1].rate == doctest::Approx(0.5));
  CHECK_THROWS_AS(ssq_rates(p, -1), std::invalid_argument);
}

TEST_CASE("jsq rates and tie-breaking") {
  auto p = QueueParams::make(2, {0.5, 0.5}, 1.0);
  std::int64_t s00[] = {0, 0};
  auto r = jsq_rates(p, s00);
  REQUIRE(r.size() == 1);
  CHECK(r[0].target == std::vector<std::int64_t>{1, 0});  // lexicographic tie to server 1
  CHECK(r[0].rate == 2.0);

  std::int64_t s21[] = {2, 1};
  r = jsq_rates(p, s21);
  REQUIRE(r.size() == 3);
  CHECK(r[0].target == std::vector<std::int64_t>{2, 2});  // argmin is server 2
  CHECK(r[0].rate == 2.0);
  CHECK(r[1].target == std::vector<std::int64_t>{1, 1});
  CHECK(r[1].rate == doctest::Approx(2.5));
  CHECK(r[2].target == std::vector<std::int64_t>{2, 0});
  CHECK(r[2].rate == doctest::Approx(1.5));

  auto p3 = QueueParams::make(2, {0.5, 0.5, 0.5}, 1.0);
  std::int64_t s111[] = {1, 1, 1};
  r = jsq_rates(p3, s111);
  CHECK(r[0].target == std::vector<std::int64_t>{2, 1, 1});

  std::int64_t bad[] = {1};
  CHECK_THROWS_AS(jsq_rates(p, bad), std::invalid_argument);
  std::int64_t neg[] = {-1, 0};
  CHECK_THROWS_AS(jsq_rates(p, neg), std::invalid_argument);
}

TEST_CASE("total outflow identity on random states") {
  auto p = QueueParams::make(1.7, {0.4, 0.9, 0.2}, 0.3);
  CounterRng rng(7, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::int64_t st[3];
    for (auto& v : st) v = static_cast<std::int64_t>(rng.next_u64() % 9);
    double sum = 0.0;
    for (const auto& e : jsq_rates(p, st)) sum += e.rate;
    CHECK(sum == doctest::Approx(total_outflow(p, st)).epsilon(1e-12));
    // arrival targets an argmin coordinate
    auto rts = jsq_rates(p, st);
    std::int64_t mn = *std::min_element(st, st + 3);
    for (int i = 0; i < 3; ++i) {
      if (rts[0].target[i] == st[i] + 1) CHECK(st[i] == mn);
    }
  }
}

TEST_CASE("n=1 jsq degenerates to ssq rates") {
  auto p = QueueParams::ssq(2, 1, 0.5);
  for (std::int64_t s = 0; s <= 20; ++s) {
    auto a = ssq_rates(p, s);
    std::int64_t st[] = {s};
    auto b = jsq_rates(p, st);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].target == b[i].target[0]);
      CHECK(a[i].rate == doctest::Approx(b[i].rate).epsilon(1e-15));
    }
  }
}
