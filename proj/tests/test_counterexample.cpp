#include "test_support.hpp"

#include "qre/counterexample.hpp"

using namespace qre;

namespace {

ProbabilityVector pv(std::initializer_list<double> xs) {
  RealVector w(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) w(i++) = x;
  return ProbabilityVector(w);
}

}  // namespace

TEST_CASE("varentropy basics", "[counterexample]") {
  CHECK(varentropy(ProbabilityVector::uniform(7)) == Catch::Approx(0.0).margin(1e-15));

  const double expected = (3.0 / 16.0) * std::log2(3.0) * std::log2(3.0);
  CHECK(varentropy(pv({0.75, 0.25})) == Catch::Approx(expected).epsilon(1e-12));

  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    auto q = ProbabilityVector(random_simplex_point(5, rng));
    CHECK(varentropy(q) >= 0.0);
  }
}

TEST_CASE("weighted varentropy", "[counterexample]") {
  Rng rng(37);
  auto p = ProbabilityVector(random_simplex_point(6, rng));
  CHECK(weighted_varentropy(WeightVector(p), p) == Catch::Approx(varentropy(p)).margin(1e-12));

  CHECK(weighted_varentropy(WeightVector(RealVector::Zero(6)), p) == 0.0);

  SECTION("additivity on i.i.d. products") {
    for (int t = 0; t < 5; ++t) {
      RealVector w = random_simplex_point(3, rng).cwiseMax(0.05);
      auto q = ProbabilityVector(w / w.sum());
      for (int copies : {2, 5, 8}) {
        auto prod = iid_product(q, copies);
        CHECK(weighted_varentropy(WeightVector(prod), prod) ==
              Catch::Approx(copies * varentropy(q)).margin(1e-9));
      }
    }
  }

  SECTION("alphabet mismatch is rejected") {
    CHECK_THROWS_AS(weighted_varentropy(WeightVector(RealVector::Ones(2)), p), ValidationError);
  }
}

TEST_CASE("g function", "[counterexample]") {
  auto u = ProbabilityVector::uniform(4);
  CHECK(g_function(WeightVector(u), u, 3) == Catch::Approx(0.0).margin(1e-15));

  Rng rng(41);
  RealVector w = random_simplex_point(4, rng).cwiseMax(0.03);
  auto q = ProbabilityVector(w / w.sum());
  const int n = 9, m = 1, r = 1;
  auto prod = iid_product(q, n - m - r);
  CHECK(g_function(WeightVector(prod), prod, n) ==
        Catch::Approx((n - m - r) * varentropy(q) / n).margin(1e-9));
}

TEST_CASE("max varentropy search", "[counterexample]") {
  SECTION("binary case matches the one-parameter grid") {
    auto res = max_varentropy_search(2, 24, 101);
    CHECK(res.value == Catch::Approx(qt::binary_varentropy_grid_max()).margin(1e-6));
    CHECK(res.value < 1.0);  // no violation available on two symbols
  }

  SECTION("four symbols exceed one bit^2, five dominate four") {
    auto r4 = max_varentropy_search(4, 32, 7);
    CHECK(r4.value > 1.0);
    CHECK(r4.success_fraction >= 0.95);
    auto r5 = max_varentropy_search(5, 32, 7);
    CHECK(r5.value >= r4.value - 1e-9);
  }
}

TEST_CASE("tilted distributions", "[counterexample]") {
  auto q = pv({0.4, 0.3, 0.2, 0.1});

  SECTION("zero tilt is the identity") {
    auto t0 = tilted_distribution(q, 0.0);
    CHECK((t0.weights() - q.weights()).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("large tilt concentrates on the argmax") {
    auto t = tilted_distribution(q, 50.0);
    CHECK(t[0] > 1.0 - 1e-6);
  }

  SECTION("negative tilt needs strict positivity") {
    CHECK_THROWS_AS(tilted_distribution(pv({0.5, 0.5, 0.0}), -0.5), ValidationError);
  }

  SECTION("second-derivative display: both routes agree") {
    // With rho, sigma diagonal in a common basis (weights tilted(q, s) and q),
    // the displayed magnitude equals ((n-m-r)/n) V(Q); the same number must
    // come out of the explicit i.i.d. weighted-varentropy construction.
    const int n = 8, m = 1, r = 1;
    auto lambda = tilted_distribution(q, 0.7);
    CHECK(lambda.strictly_positive());
    const double direct = (n - m - r) * varentropy(q) / static_cast<double>(n);
    auto prod = iid_product(q, n - m - r);
    const double via_product = g_function(WeightVector(prod), prod, n);
    CHECK(direct == Catch::Approx(via_product).margin(1e-9));
  }
}

TEST_CASE("counterexample report", "[counterexample]") {
  SECTION("four symbols violate both claims") {
    auto rep = counterexample_report(4, 1, 1, {8, 16, 32}, 24, 7);
    CHECK(rep.v_q > 1.0);
    CHECK(rep.rows.size() == 3);
    CHECK(rep.g_nondecreasing);
    CHECK(rep.rows.back().g > 1.0);
    CHECK(rep.any_g_above_1);
    CHECK(rep.o1_claim_violated);
    for (const auto& row : rep.rows) CHECK(row.g <= rep.v_q + 1e-12);
    // recorded scale check
    CHECK(rep.log2_min_prob_last ==
          Catch::Approx(30.0 * std::log2(rep.q_star.weights().minCoeff())).margin(1e-9));
  }

  SECTION("explicit and closed-form g agree at n = 6") {
    auto rep = counterexample_report(4, 1, 1, {6}, 16, 3);
    REQUIRE(rep.rows.size() == 1);
    REQUIRE(rep.rows.front().explicit_check_dev >= 0.0);  // check actually ran
    CHECK(rep.rows.front().explicit_check_dev <= 1e-9);
  }

  SECTION("binary alphabet flags nothing") {
    auto rep = counterexample_report(2, 1, 1, {8, 16, 32}, 24, 11);
    CHECK(rep.v_q < 1.0);
    CHECK_FALSE(rep.any_g_above_1);
  }

  SECTION("n below m + r is rejected") {
    CHECK_THROWS_AS(counterexample_report(4, 2, 2, {4}, 4, 1), ValidationError);
  }
}
