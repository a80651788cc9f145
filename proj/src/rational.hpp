#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace martrep {

// Exact rational scalar used for every symbolic coefficient in the library.
// Doubles convert losslessly (every finite double is dyadic), which is what
// lets float path increments fold into coefficients without rounding.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Parses "p", "-p/q", or a decimal literal like "0.125" into an exact value.
// Raises Parse on malformed text or zero denominator.
Rational rational_from_string(std::string_view text);

// Canonical text form: "p" when the denominator is 1, else "p/q" in lowest
// terms with the sign on the numerator. Round-trips bit-exactly.
std::string rational_to_string(const Rational& value);

inline Rational rational_from_double(double value) {
  require(std::isfinite(value), ErrorCode::Numeric,
          "cannot convert non-finite double to rational");
  return Rational(value);
}

inline double rational_to_double(const Rational& value) {
  return value.convert_to<double>();
}

Rational rational_pow(const Rational& base, unsigned exponent);

// Exact square root when `value` is a perfect square of a rational; nullopt
// otherwise. Requires value >= 0.
std::optional<Rational> rational_sqrt(const Rational& value);

Rational factorial(unsigned n);

Rational binomial(unsigned n, unsigned k);

// Falling factorial n·(n-1)·…·(n-l+1).
Rational falling_factorial(unsigned n, unsigned l);

}  // namespace martrep
