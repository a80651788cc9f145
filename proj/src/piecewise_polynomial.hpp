#pragma once

#include <compare>
#include <vector>

#include "rational.hpp"

namespace martrep {

/// Univariate piecewise polynomial on [0, horizon] with exact rational
/// breakpoints and coefficients. Segment i holds on (break_i, break_{i+1}]
/// (the first segment also covers 0), so evaluation at interior breakpoints
/// is left-continuous.
///
/// Instances are normalized on construction: trailing zero coefficients are
/// trimmed per segment and adjacent segments with identical polynomials are
/// merged, so structural equality is semantic equality.
class PiecewisePolynomial {
 public:
  /// coefficients[i][j] is the u^j coefficient on segment i.
  /// pre: breakpoints strictly increasing, breakpoints.front() == 0,
  ///      coefficients.size() + 1 == breakpoints.size().
  static PiecewisePolynomial from_segments(std::vector<Rational> breakpoints,
                                           std::vector<std::vector<Rational>> coefficients);

  static PiecewisePolynomial constant(const Rational& value, const Rational& horizon);

  /// a0 + a1 * u on [0, horizon].
  static PiecewisePolynomial linear(const Rational& a0, const Rational& a1,
                                    const Rational& horizon);

  const Rational& horizon() const { return breakpoints_.back(); }
  const std::vector<Rational>& breakpoints() const { return breakpoints_; }
  const std::vector<std::vector<Rational>>& coefficients() const { return coefficients_; }

  /// Left-continuous evaluation. pre: 0 <= u <= horizon (Domain error otherwise).
  Rational evaluate(const Rational& u) const;

  /// Exact integral over [a, b]. pre: 0 <= a <= b <= horizon.
  Rational integrate(const Rational& a, const Rational& b) const;

  PiecewisePolynomial derivative() const;

  /// Antiderivative F with F(0) = 0, continuous across breakpoints.
  PiecewisePolynomial antiderivative() const;

  /// u -> integral over [u, horizon], as a piecewise polynomial.
  PiecewisePolynomial integral_to_horizon() const;

  /// Arithmetic requires matching horizons (Domain error otherwise).
  PiecewisePolynomial operator+(const PiecewisePolynomial& other) const;
  PiecewisePolynomial operator-(const PiecewisePolynomial& other) const;
  PiecewisePolynomial operator*(const PiecewisePolynomial& other) const;
  PiecewisePolynomial scaled(const Rational& factor) const;
  PiecewisePolynomial operator-() const { return scaled(-1); }

  bool is_zero() const;
  bool is_constant() const;
  /// pre: is_constant().
  Rational constant_value() const;

  /// Largest u^j power appearing on any segment (0 for the zero function).
  unsigned degree() const;

  bool operator==(const PiecewisePolynomial& other) const = default;

  /// Total order for canonicalization (lexicographic on structure).
  std::strong_ordering compare(const PiecewisePolynomial& other) const;

 private:
  PiecewisePolynomial() = default;
  void normalize();

  std::vector<Rational> breakpoints_;
  std::vector<std::vector<Rational>> coefficients_;
};

}  // namespace martrep
