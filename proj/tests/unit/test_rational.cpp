#include <doctest.h>

#include "rational.hpp"

using namespace martrep;

TEST_CASE("rational parsing accepts integers, fractions, and decimals") {
  CHECK(rational_from_string("3") == Rational(3));
  CHECK(rational_from_string("-7") == Rational(-7));
  CHECK(rational_from_string("1/3") == Rational(1, 3));
  CHECK(rational_from_string("-2/6") == Rational(-1, 3));
  CHECK(rational_from_string("0.125") == Rational(1, 8));
  CHECK(rational_from_string("-0.5") == Rational(-1, 2));
  CHECK(rational_from_string("10/4") == Rational(5, 2));
  // surrounding whitespace is tolerated (config files)
  CHECK(rational_from_string(" 1/2 ") == Rational(1, 2));
}

TEST_CASE("rational parsing rejects malformed text") {
  for (const char* bad : {"", "abc", "1/0", "1//2", "1/2/3", "1.2.3", "2.", "2e3", "--3"}) {
    CHECK_THROWS_AS(rational_from_string(bad), Error);
    try {
      rational_from_string(bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
    }
  }
}

TEST_CASE("rational text form is canonical and round-trips") {
  CHECK(rational_to_string(Rational(5, 1)) == "5");
  CHECK(rational_to_string(Rational(-3, 9)) == "-1/3");
  CHECK(rational_to_string(Rational(0)) == "0");
  for (const char* text : {"22/7", "-1/8", "4", "0"}) {
    CHECK(rational_to_string(rational_from_string(text)) == text);
  }
}

TEST_CASE("doubles convert losslessly") {
  // 0.1 is the dyadic 3602879701896397 / 2^55
  CHECK(rational_from_double(0.1) == Rational(3602879701896397LL, 36028797018963968LL));
  CHECK(rational_from_double(0.5) == Rational(1, 2));
  CHECK(rational_to_double(rational_from_double(0.3)) == 0.3);
  double weird = 1.0 / 3.0;
  CHECK(rational_to_double(rational_from_double(weird)) == weird);
  CHECK_THROWS_AS(rational_from_double(std::nan("")), Error);
  CHECK_THROWS_AS(rational_from_double(1.0 / 0.0), Error);
}

TEST_CASE("power, factorial, binomial, falling factorial") {
  CHECK(rational_pow(Rational(2, 3), 3) == Rational(8, 27));
  CHECK(rational_pow(Rational(5), 0) == Rational(1));
  CHECK(factorial(0) == Rational(1));
  CHECK(factorial(6) == Rational(720));
  CHECK(binomial(6, 2) == Rational(15));
  CHECK(binomial(4, 0) == Rational(1));
  CHECK(binomial(3, 5) == Rational(0));
  CHECK(falling_factorial(5, 2) == Rational(20));
  CHECK(falling_factorial(3, 3) == Rational(6));
  CHECK(falling_factorial(2, 4) == Rational(0));
  CHECK(falling_factorial(7, 0) == Rational(1));
}

TEST_CASE("exact square roots of perfect squares") {
  CHECK(rational_sqrt(Rational(9, 4)) == Rational(3, 2));
  CHECK(rational_sqrt(Rational(1)) == Rational(1));
  CHECK(rational_sqrt(Rational(0)) == Rational(0));
  CHECK_FALSE(rational_sqrt(Rational(2)).has_value());
  CHECK_FALSE(rational_sqrt(Rational(1, 3)).has_value());
}
