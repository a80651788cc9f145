#include "gamma.hpp"

#include <deque>
#include <mutex>
#include <sstream>

namespace martrep {

namespace {

const Rational kZero = 0;

}  // namespace

const Rational& GammaPolynomial::coefficient(unsigned delta_power, unsigned x_power) const {
  if (delta_power >= coeffs_.size()) return kZero;
  if (x_power >= coeffs_[delta_power].size()) return kZero;
  return coeffs_[delta_power][x_power];
}

Rational GammaPolynomial::evaluate(const Rational& delta, const Rational& x) const {
  Rational out = 0;
  for (size_t i = coeffs_.size(); i-- > 0;) {
    Rational row = 0;
    for (size_t j = coeffs_[i].size(); j-- > 0;) row = row * x + coeffs_[i][j];
    out = out * delta + row;
  }
  return out;
}

double GammaPolynomial::evaluate(double delta, double x) const {
  double out = 0;
  for (size_t i = coeffs_.size(); i-- > 0;) {
    double row = 0;
    for (size_t j = coeffs_[i].size(); j-- > 0;) row = row * x + rational_to_double(coeffs_[i][j]);
    out = out * delta + row;
  }
  return out;
}

unsigned GammaPolynomial::x_degree() const {
  size_t deg = 0;
  for (const auto& row : coeffs_) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0) deg = std::max(deg, j);
    }
  }
  return static_cast<unsigned>(deg);
}

std::string GammaPolynomial::to_string() const {
  std::ostringstream out;
  bool first = true;
  // ordered by total degree, then x power, for a stable readable form
  for (unsigned total = 0; total <= order_ + delta_degree(); ++total) {
    for (unsigned j = 0; j <= total; ++j) {
      unsigned i = total - j;
      const Rational& c = coefficient(i, j);
      if (c == 0) continue;
      Rational mag = c < 0 ? Rational(-c) : c;
      if (first) {
        if (c < 0) out << "-";
        first = false;
      } else {
        out << (c < 0 ? " - " : " + ");
      }
      bool has_vars = i > 0 || j > 0;
      if (mag != 1 || !has_vars) {
        out << rational_to_string(mag);
        if (has_vars) out << "*";
      }
      if (i > 0) {
        out << "delta";
        if (i > 1) out << "^" << i;
        if (j > 0) out << "*";
      }
      if (j > 0) {
        out << "x";
        if (j > 1) out << "^" << j;
      }
    }
  }
  if (first) out << "0";
  return out.str();
}

const GammaPolynomial& gamma_coefficient(unsigned order) {
  static std::mutex mutex;
  static std::deque<GammaPolynomial> table;  // deque: references stay valid on growth

  std::lock_guard<std::mutex> lock(mutex);
  while (table.size() <= order) {
    const unsigned big_l = static_cast<unsigned>(table.size());
    GammaPolynomial g;
    g.order_ = big_l;
    g.coeffs_.assign(big_l / 2 + 1, std::vector<Rational>(big_l + 1, Rational(0)));
    if (big_l == 0) {
      g.coeffs_[0][0] = 1;
    } else {
      if (big_l % 2 == 0) {
        // (delta/2)^{L/2} / (L/2)!
        unsigned half = big_l / 2;
        g.coeffs_[half][0] = Rational(1) / (rational_pow(Rational(2), half) * factorial(half));
      }
      for (unsigned l = 0; l < big_l; ++l) {
        const GammaPolynomial& prev = table[l];
        Rational inv_fact = Rational(1) / factorial(big_l - l);
        // subtract prev * x^{L-l} / (L-l)!
        for (unsigned i = 0; i < prev.coeffs_.size(); ++i) {
          for (unsigned j = 0; j < prev.coeffs_[i].size(); ++j) {
            if (prev.coeffs_[i][j] == 0) continue;
            g.coeffs_[i][j + big_l - l] -= prev.coeffs_[i][j] * inv_fact;
          }
        }
      }
    }
    table.push_back(std::move(g));
  }
  return table[order];
}

double gamma_evaluate(unsigned order, double delta, double increment) {
  return gamma_coefficient(order).evaluate(delta, increment);
}

}  // namespace martrep
