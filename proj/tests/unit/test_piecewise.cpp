#include <doctest.h>

#include "piecewise_polynomial.hpp"

using namespace martrep;

namespace {

PiecewisePolynomial one_minus_u() {
  // 1 - u on [0, 1]
  return PiecewisePolynomial::linear(1, -1, 1);
}

PiecewisePolynomial hat() {
  // u on [0, 1/2), 1 - u on [1/2, 1]
  return PiecewisePolynomial::from_segments({0, Rational(1, 2), 1},
                                            {{0, 1}, {1, -1}});
}

}  // namespace

TEST_CASE("construction validates breakpoints") {
  CHECK_THROWS_AS(PiecewisePolynomial::from_segments({1, 2}, {{1}}), Error);
  CHECK_THROWS_AS(PiecewisePolynomial::from_segments({0, 1, 1}, {{1}, {2}}), Error);
  CHECK_THROWS_AS(PiecewisePolynomial::from_segments({0}, {}), Error);
  CHECK_THROWS_AS(PiecewisePolynomial::from_segments({0, 1}, {{1}, {2}}), Error);
}

TEST_CASE("evaluation is left-continuous with closed right end") {
  auto h = hat();
  CHECK(h.evaluate(0) == Rational(0));
  CHECK(h.evaluate(Rational(1, 4)) == Rational(1, 4));
  CHECK(h.evaluate(Rational(3, 4)) == Rational(1, 4));
  CHECK(h.evaluate(1) == Rational(0));
  CHECK_THROWS_AS(h.evaluate(Rational(3, 2)), Error);
  CHECK_THROWS_AS(h.evaluate(Rational(-1, 2)), Error);

  // discontinuous at 1/2: the left segment decides the breakpoint value
  auto jump = PiecewisePolynomial::from_segments({0, Rational(1, 2), 1}, {{1}, {0, 2}});
  CHECK(jump.evaluate(Rational(1, 2)) == Rational(1));
  CHECK(jump.evaluate(Rational(3, 4)) == Rational(3, 2));
  CHECK(jump.evaluate(1) == Rational(2));

  // constant and linear kernels at sample points
  CHECK(PiecewisePolynomial::constant(1, 1).evaluate(Rational(3, 10)) == Rational(1));
  CHECK(PiecewisePolynomial::linear(1, -1, 1).evaluate(Rational(1, 4)) == Rational(3, 4));
}

TEST_CASE("integrate matches closed forms") {
  auto f = one_minus_u();
  auto sq = f * f;  // (1-u)^2
  CHECK(sq.integrate(0, 1) == Rational(1, 3));
  CHECK(f.integrate(0, Rational(1, 2)) == Rational(3, 8));
  CHECK(hat().integrate(0, 1) == Rational(1, 4));
  // integral is additive over subintervals split anywhere
  auto a = sq.integrate(0, Rational(1, 3));
  auto b = sq.integrate(Rational(1, 3), 1);
  CHECK(a + b == Rational(1, 3));
  CHECK(sq.integrate(Rational(1, 2), Rational(1, 2)) == Rational(0));
  CHECK_THROWS_AS(sq.integrate(Rational(1, 2), Rational(1, 4)), Error);
}

TEST_CASE("derivative and antiderivative invert") {
  auto h = hat();
  auto F = h.antiderivative();
  CHECK(F.evaluate(0) == Rational(0));
  // continuity at the breakpoint: antiderivative carries the running constant
  CHECK(F.evaluate(Rational(1, 2)) == Rational(1, 8));
  CHECK(F.evaluate(1) == Rational(1, 4));
  CHECK(F.derivative() == h);
  CHECK(h.derivative() ==
        PiecewisePolynomial::from_segments({0, Rational(1, 2), 1}, {{1}, {-1}}));
}

TEST_CASE("integral_to_horizon gives the tail integral") {
  auto f = one_minus_u();
  auto tail = f.integral_to_horizon();  // u -> (1-u)^2/2
  CHECK(tail.evaluate(0) == Rational(1, 2));
  CHECK(tail.evaluate(Rational(1, 2)) == Rational(1, 8));
  CHECK(tail.evaluate(1) == Rational(0));
}

TEST_CASE("arithmetic merges breakpoints and requires equal horizons") {
  auto f = one_minus_u();
  auto h = hat();
  auto s = f + h;
  CHECK(s.evaluate(Rational(1, 4)) == Rational(1));
  CHECK(s.evaluate(Rational(3, 4)) == Rational(1, 2));
  auto p = f * h;
  CHECK(p.evaluate(Rational(1, 4)) == Rational(3, 16));
  CHECK(p.degree() == 2);
  CHECK((f - f).is_zero());
  auto other_horizon = PiecewisePolynomial::constant(1, 2);
  CHECK_THROWS_AS(f + other_horizon, Error);
}

TEST_CASE("normalization merges equal segments and makes equality semantic") {
  // same function written with a redundant breakpoint
  auto plain = PiecewisePolynomial::linear(0, 1, 1);
  auto split = PiecewisePolynomial::from_segments({0, Rational(1, 3), 1}, {{0, 1}, {0, 1}});
  CHECK(plain == split);
  auto padded = PiecewisePolynomial::from_segments({0, 1}, {{0, 1, 0, 0}});
  CHECK(plain == padded);
  CHECK(plain.compare(split) == std::strong_ordering::equal);
}

TEST_CASE("constant recognition") {
  auto c = PiecewisePolynomial::constant(Rational(5, 7), 3);
  CHECK(c.is_constant());
  CHECK(c.constant_value() == Rational(5, 7));
  CHECK_FALSE(c.is_zero());
  CHECK(PiecewisePolynomial::constant(0, 1).is_zero());
  CHECK_FALSE(hat().is_constant());
  CHECK(c.degree() == 0);
}

TEST_CASE("compare orders structurally") {
  auto a = PiecewisePolynomial::constant(1, 1);
  auto b = PiecewisePolynomial::linear(0, 1, 1);
  CHECK(a.compare(b) != std::strong_ordering::equal);
  CHECK((a.compare(b) == std::strong_ordering::less) !=
        (b.compare(a) == std::strong_ordering::less));
  CHECK(a.compare(a) == std::strong_ordering::equal);
}
