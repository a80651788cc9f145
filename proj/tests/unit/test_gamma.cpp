#include <doctest.h>

#include "gamma.hpp"

using namespace martrep;

TEST_CASE("low-order coefficient polynomials are exact") {
  // order 0: 1
  CHECK(gamma_coefficient(0).evaluate(Rational(1, 3), Rational(5, 7)) == Rational(1));

  // order 1: -x
  const auto& g1 = gamma_coefficient(1);
  CHECK(g1.coefficient(0, 1) == Rational(-1));
  CHECK(g1.coefficient(0, 0) == Rational(0));
  CHECK(g1.evaluate(Rational(1, 4), Rational(1, 10)) == Rational(-1, 10));

  // order 2: (x^2 + delta)/2
  const auto& g2 = gamma_coefficient(2);
  CHECK(g2.coefficient(0, 2) == Rational(1, 2));
  CHECK(g2.coefficient(1, 0) == Rational(1, 2));
  CHECK(g2.coefficient(0, 0) == Rational(0));
  CHECK(g2.coefficient(0, 1) == Rational(0));

  // order 3: -x^3/6 - delta*x/2
  const auto& g3 = gamma_coefficient(3);
  CHECK(g3.coefficient(0, 3) == Rational(-1, 6));
  CHECK(g3.coefficient(1, 1) == Rational(-1, 2));
  CHECK(g3.coefficient(0, 1) == Rational(0));

  // order 4: x^4/24 + delta*x^2/4 + delta^2/8
  const auto& g4 = gamma_coefficient(4);
  CHECK(g4.coefficient(0, 4) == Rational(1, 24));
  CHECK(g4.coefficient(1, 2) == Rational(1, 4));
  CHECK(g4.coefficient(2, 0) == Rational(1, 8));
}

TEST_CASE("frozen values follow the closed form") {
  // at x = 0: even orders (delta/2)^k / k!, odd orders 0
  Rational delta(1, 3);
  Rational power(1);
  Rational fact(1);
  for (unsigned k = 0; k <= 6; ++k) {
    if (k > 0) {
      power *= delta / 2;
      fact *= k;
    }
    CHECK(gamma_coefficient(2 * k).evaluate(delta, Rational(0)) == power / fact);
    CHECK(gamma_coefficient(2 * k + 1).evaluate(delta, Rational(0)) == Rational(0));
  }
  // the classic 1/(2n) and 1/(8n^2) values at delta = 1/n
  CHECK(gamma_coefficient(2).evaluate(Rational(1, 16), Rational(0)) == Rational(1, 32));
  CHECK(gamma_coefficient(4).evaluate(Rational(1, 16), Rational(0)) == Rational(1, 2048));
}

TEST_CASE("parity in the increment") {
  Rational delta(2, 7), x(3, 5);
  for (unsigned l = 0; l <= 12; ++l) {
    auto plus = gamma_coefficient(l).evaluate(delta, x);
    auto minus = gamma_coefficient(l).evaluate(delta, -x);
    if (l % 2 == 0) {
      CHECK(plus == minus);
    } else {
      CHECK(plus == -minus);
    }
  }
}

TEST_CASE("degrees and float evaluation") {
  const auto& g5 = gamma_coefficient(5);
  CHECK(g5.x_degree() == 5);
  CHECK(g5.order() == 5);
  CHECK(gamma_evaluate(1, 0.25, 0.1) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(gamma_evaluate(2, 0.5, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  // float and rational paths agree
  double fe = gamma_evaluate(6, 0.125, 0.375);
  auto re = gamma_coefficient(6).evaluate(Rational(1, 8), Rational(3, 8));
  CHECK(fe == doctest::Approx(rational_to_double(re)).epsilon(1e-14));
}

TEST_CASE("to_string prints the normal form") {
  CHECK(gamma_coefficient(0).to_string() == "1");
  CHECK(gamma_coefficient(1).to_string() == "-x");
  auto s2 = gamma_coefficient(2).to_string();
  CHECK(s2.find("delta") != std::string::npos);
  CHECK(s2.find("x^2") != std::string::npos);
}

TEST_CASE("cached polynomials keep stable references") {
  const auto& first = gamma_coefficient(8);
  (void)gamma_coefficient(20);  // grow the table
  const auto& again = gamma_coefficient(8);
  CHECK(&first == &again);
}
