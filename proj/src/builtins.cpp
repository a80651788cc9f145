#include "builtins.hpp"

namespace martrep {

WienerFunctional heat_kernel(const Rational& tau, const Rational& horizon) {
  require(tau > horizon, ErrorCode::Domain, "tau must exceed the horizon");
  auto root = rational_sqrt(tau - horizon);
  require(root.has_value(), ErrorCode::Domain,
          "tau - horizon must be a perfect rational square to keep coefficients exact");
  QuadraticForm q = QuadraticForm::zero(1);
  q.set(0, 0, Rational(-1) / (2 * (tau - horizon)));
  WienerFunctional f =
      WienerFunctional::exp_quadratic({PiecewisePolynomial::constant(1, horizon)}, q);
  return f.scaled(Rational(1) / *root);
}

WienerFunctional exp_integral(const Rational& horizon) {
  // integral_0^T W du = integral_0^T (T - u) dW by integration by parts
  QuadraticForm q = QuadraticForm::zero(1);
  q.linear[0] = -1;
  return WienerFunctional::exp_quadratic(
      {PiecewisePolynomial::linear(horizon, -1, horizon)}, q);
}

WienerFunctional wiener_power(unsigned n, const Rational& horizon) {
  return WienerFunctional::gaussian_linear(PiecewisePolynomial::constant(1, horizon)).power(n);
}

WienerFunctional exp_wiener(const Rational& horizon) {
  QuadraticForm q = QuadraticForm::zero(1);
  q.linear[0] = 1;
  return WienerFunctional::exp_quadratic({PiecewisePolynomial::constant(1, horizon)}, q);
}

}  // namespace martrep
