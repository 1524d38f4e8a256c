#include "doctest.h"

#include <random>

#include "fluctlat/rates.hpp"

using namespace fluctlat;

TEST_CASE("builtin families") {
  const auto c = build_cylinder_rate("constant");
  CHECK(c.range() == 0);
  CHECK(c.table() == std::vector<double>{1.0, 1.0});

  const auto ns = build_cylinder_rate("neighbor-sum");
  CHECK(ns.range() == 1);
  // windows (eta(-1), eta(0), eta(1)) with eta(-1) most significant
  CHECK(ns.table() == std::vector<double>{0, 1, 0, 1, 1, 2, 1, 2});

  CHECK(build_cylinder_rate("zero").is_zero());
  CHECK_THROWS_AS(build_cylinder_rate("nonsense"), ValidationError);
  CHECK_THROWS_AS(build_cylinder_rate("custom"), ValidationError);
}

TEST_CASE("table validation") {
  CHECK_THROWS_AS(build_cylinder_rate("custom", 0, {1.0, -1.0}), ValidationError);
  CHECK_THROWS_AS(build_cylinder_rate("custom", 0, {1.0, 1.0, 1.0}), ShapeError);
  CHECK_THROWS_AS(build_cylinder_rate("custom", 1, {1.0, 1.0}), ShapeError);
  CHECK_NOTHROW(build_cylinder_rate("custom", 1, std::vector<double>(8, 0.5)));
}

TEST_CASE("macroscopic rates of the builtins") {
  const auto c = macroscopic_rates(build_cylinder_rate("constant"), 0.3);
  CHECK(c.creation == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(c.annihilation == doctest::Approx(0.3).epsilon(1e-15));

  const auto ns = macroscopic_rates(build_cylinder_rate("neighbor-sum"), 0.5);
  CHECK(ns.creation == doctest::Approx(0.5));
  CHECK(ns.annihilation == doctest::Approx(0.5));

  for (double a : {0.1, 0.37, 0.8}) {
    const auto v = macroscopic_rates(build_cylinder_rate("neighbor-sum"), a);
    CHECK(v.creation == doctest::Approx(2 * a * (1 - a)));
    CHECK(v.annihilation == doctest::Approx(2 * a * a));
  }
  CHECK_THROWS_AS(macroscopic_rates(build_cylinder_rate("constant"), 1.2), DomainError);
  CHECK_THROWS_AS(macroscopic_rates(build_cylinder_rate("constant"), -0.1), DomainError);
}

TEST_CASE("constant family is linear at 101 points") {
  const MacroscopicCoefficients m(build_cylinder_rate("constant"));
  for (int i = 0; i <= 100; ++i) {
    const double a = i / 100.0;
    CHECK(std::abs(m.creation(a) - (1 - a)) < 1e-15);
    CHECK(std::abs(m.annihilation(a) - a) < 1e-15);
  }
}

TEST_CASE("random tables: bounds, A(0) = 0, and the enumeration identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int range = 0; range <= 2; ++range) {
    std::vector<double> table(std::size_t{1} << (2 * range + 1));
    for (double& v : table) v = u(rng);
    const auto rate = build_cylinder_rate("custom", range, table);
    const MacroscopicCoefficients cached(rate);
    CHECK(macroscopic_rates(rate, 0.0).annihilation == 0.0);
    for (int i = 0; i <= 20; ++i) {
      const double a = i / 20.0;
      const auto v = macroscopic_rates(rate, a);
      CHECK(v.creation >= 0.0);
      CHECK(v.annihilation >= 0.0);
      CHECK(v.creation <= rate.max_rate() + 1e-12);
      CHECK(v.annihilation <= rate.max_rate() + 1e-12);
      CHECK(v.creation + v.annihilation == doctest::Approx(rate.function().bernoulli_mean(a)));
      CHECK(cached.creation(a) == doctest::Approx(v.creation));
      CHECK(cached.annihilation(a) == doctest::Approx(v.annihilation));
    }
  }
}

TEST_CASE("conductivity and boundary density") {
  CHECK(conductivity(0.5) == 0.25);
  CHECK(conductivity(0.0) == 0.0);
  CHECK(conductivity(1.0) == 0.0);
  for (double a : {0.1, 0.33, 0.7}) CHECK(conductivity(a) == doctest::Approx(conductivity(1 - a)));
  CHECK_THROWS_AS(conductivity(1.5), DomainError);
  CHECK(boundary_density(1.0) == 0.5);
  CHECK(boundary_density(0.0) == 0.0);
  CHECK(boundary_density(3.0) == 0.75);
  CHECK_THROWS_AS(boundary_density(-1.0), DomainError);
}

TEST_CASE("assumption checks") {
  const auto c = check_assumptions(build_cylinder_rate("constant"));
  CHECK(c.l1_ok);
  CHECK(c.l2_ok);

  const auto ns = check_assumptions(build_cylinder_rate("neighbor-sum"));
  CHECK_FALSE(ns.l2_ok);
  CHECK(ns.l2_witness >= 0.0);
  CHECK(ns.l2_witness < 0.5);

  const auto z = check_assumptions(build_cylinder_rate("zero"));
  CHECK(z.l1_ok);
  CHECK(z.l2_ok);
}
