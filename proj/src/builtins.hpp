#pragma once

#include "wiener_functional.hpp"

namespace martrep {

/// Gaussian-kernel functional (tau - T)^{-1/2} exp(-W(T)^2 / (2(tau - T))).
/// Its conditional expectation has the closed form
/// (tau - t)^{-1/2} exp(-W(t)^2 / (2(tau - t))).
/// pre: tau > horizon, and tau - horizon a perfect rational square (the
/// prefactor must stay rational); Domain error otherwise.
WienerFunctional heat_kernel(const Rational& tau, const Rational& horizon);

/// exp(-integral_0^T W(u) du), written as exp(-Z) with kernel (T - u).
/// Closed-form conditional expectation:
/// exp(-integral_0^t W du - W(t)(T-t) + (T-t)^3/6).
WienerFunctional exp_integral(const Rational& horizon);

/// W(T)^n.
WienerFunctional wiener_power(unsigned n, const Rational& horizon);

/// exp(W(T)); conditional expectation exp(W(t) + (T-t)/2).
WienerFunctional exp_wiener(const Rational& horizon);

}  // namespace martrep
