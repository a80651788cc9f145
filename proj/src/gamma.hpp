#pragma once

#include <string>
#include <vector>

#include "rational.hpp"

namespace martrep {

/// Coefficient polynomial of the backward Taylor expansion, a bivariate
/// polynomial in the step length `delta` and the step increment `x`, defined
/// by the recursion
///   G_0 = 1,
///   G_L = [L even] (delta/2)^{L/2} / (L/2)!  -  sum_{l<L} G_l x^{L-l}/(L-l)!
/// The x-degree of G_L is exactly L and the delta-degree is at most L/2.
/// At x = 0 the odd orders vanish and G_{2m} = (delta/2)^m / m!.
class GammaPolynomial {
 public:
  unsigned order() const { return order_; }

  /// Coefficient of delta^i x^j (0 outside the stored range).
  const Rational& coefficient(unsigned delta_power, unsigned x_power) const;

  Rational evaluate(const Rational& delta, const Rational& x) const;
  double evaluate(double delta, double x) const;

  /// Human-readable normal form, e.g. "1/2*delta + 1/2*x^2".
  std::string to_string() const;

  unsigned delta_degree() const { return static_cast<unsigned>(coeffs_.size()) - 1; }
  unsigned x_degree() const;

 private:
  friend const GammaPolynomial& gamma_coefficient(unsigned order);
  GammaPolynomial() = default;

  unsigned order_ = 0;
  // coeffs_[i][j] multiplies delta^i x^j
  std::vector<std::vector<Rational>> coeffs_;
};

/// Cached table of the polynomials; safe under concurrent first use. The
/// returned reference stays valid for the process lifetime.
const GammaPolynomial& gamma_coefficient(unsigned order);

/// Float64 convenience evaluation of gamma_coefficient(order).
/// pre: delta > 0 (documented only; the polynomial is total).
double gamma_evaluate(unsigned order, double delta, double increment);

}  // namespace martrep
