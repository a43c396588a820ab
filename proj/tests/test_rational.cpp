#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <stdexcept>

#include "cats/rational.hpp"

using cats::Rational;

TEST_CASE("rational normalizes on construction", "[rational]") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-2, 4) == Rational(-1, 2));
  CHECK(Rational(2, -4) == Rational(-1, 2));
  CHECK(Rational(-2, -4) == Rational(1, 2));
  CHECK(Rational(0, 7) == Rational(0));
  CHECK(Rational(0, -7).den() == 1);
  CHECK(Rational(6, 3).is_integer());
  CHECK(Rational(6, 3).num() == 2);
}

TEST_CASE("rational arithmetic is exact", "[rational]") {
  Rational third(1, 3);
  CHECK(third + third + third == Rational(1));
  CHECK(Rational(1, 10) + Rational(2, 10) == Rational(3, 10));
  CHECK(Rational(1) - Rational(1, 3) == Rational(2, 3));
  CHECK(Rational(3, 4) * Rational(2, 3) == Rational(1, 2));
  CHECK(Rational(3, 4) / Rational(3, 2) == Rational(1, 2));
  CHECK(-Rational(5, 7) == Rational(-5, 7));

  Rational acc(0);
  for (int i = 0; i < 100; ++i) acc += Rational(1, 100);
  CHECK(acc == Rational(1));
}

TEST_CASE("rational comparisons use cross-multiplication", "[rational]") {
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 2) < Rational(-1, 3));
  CHECK(Rational(2, 6) <= Rational(1, 3));
  CHECK(Rational(2, 6) >= Rational(1, 3));
  CHECK(Rational(7, 2) > Rational(3));
  // Large values that would overflow a naive double comparison's precision.
  Rational a(std::int64_t{1} << 60, 3);
  Rational b((std::int64_t{1} << 60) + 3, 3);
  CHECK(a < b);
}

TEST_CASE("rational zero denominator and division by zero throw", "[rational]") {
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
  CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
}

TEST_CASE("rational overflow is detected, not wrapped", "[rational]") {
  Rational big(std::int64_t{1} << 62);
  CHECK_THROWS_AS(big * Rational(4), std::overflow_error);
  Rational huge_den(1, std::int64_t{1} << 62);
  CHECK_THROWS_AS(huge_den * Rational(1, 4), std::overflow_error);
}

TEST_CASE("rational decimal parsing", "[rational]") {
  CHECK(Rational::from_decimal("12") == Rational(12));
  CHECK(Rational::from_decimal("-3.25") == Rational(-13, 4));
  CHECK(Rational::from_decimal("0.1") == Rational(1, 10));
  CHECK(Rational::from_decimal("10.") == Rational(10));
  CHECK(Rational::from_decimal("+2.5") == Rational(5, 2));
  CHECK_THROWS_AS(Rational::from_decimal(""), std::invalid_argument);
  CHECK_THROWS_AS(Rational::from_decimal("1.2.3"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::from_decimal("abc"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::from_decimal("."), std::invalid_argument);
}

TEST_CASE("rational parse accepts fraction form", "[rational]") {
  CHECK(Rational::parse("2/3") == Rational(2, 3));
  CHECK(Rational::parse("-2/3") == Rational(-2, 3));
  CHECK(Rational::parse("0.5") == Rational(1, 2));
  CHECK(Rational::parse("7") == Rational(7));
  CHECK_THROWS_AS(Rational::parse("1/0"), std::domain_error);
}

TEST_CASE("rational to_string picks the most readable exact form", "[rational]") {
  CHECK(Rational(7).to_string() == "7");
  CHECK(Rational(-7).to_string() == "-7");
  CHECK(Rational(1, 2).to_string() == "0.5");
  CHECK(Rational(-1, 2).to_string() == "-0.5");
  CHECK(Rational(1, 10).to_string() == "0.1");
  CHECK(Rational(1, 8).to_string() == "0.125");
  CHECK(Rational(3, 20).to_string() == "0.15");
  CHECK(Rational(1, 3).to_string() == "1/3");
  CHECK(Rational(-5, 6).to_string() == "-5/6");
}

TEST_CASE("rational to_string round-trips through parse", "[rational]") {
  const Rational samples[] = {Rational(0),      Rational(7),      Rational(-7),
                              Rational(1, 2),   Rational(-3, 8),  Rational(1, 3),
                              Rational(22, 7),  Rational(-22, 7), Rational(19, 20),
                              Rational(1, 1024)};
  for (const Rational& r : samples) {
    CAPTURE(r.to_string());
    CHECK(Rational::parse(r.to_string()) == r);
  }
}
