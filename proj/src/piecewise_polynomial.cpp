#include "piecewise_polynomial.hpp"

#include <algorithm>

namespace martrep {

namespace {

void trim_trailing_zeros(std::vector<Rational>& coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0) coeffs.pop_back();
  if (coeffs.empty()) coeffs.push_back(Rational(0));
}

Rational eval_poly(const std::vector<Rational>& coeffs, const Rational& u) {
  Rational out = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) out = out * u + *it;
  return out;
}

// Antiderivative coefficients with constant term `c0`.
std::vector<Rational> antiderive_poly(const std::vector<Rational>& coeffs, const Rational& c0) {
  std::vector<Rational> out(coeffs.size() + 1);
  out[0] = c0;
  for (size_t j = 0; j < coeffs.size(); ++j) out[j + 1] = coeffs[j] / Rational(j + 1);
  return out;
}

std::strong_ordering compare_rational(const Rational& a, const Rational& b) {
  if (a < b) return std::strong_ordering::less;
  if (b < a) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace

PiecewisePolynomial PiecewisePolynomial::from_segments(
    std::vector<Rational> breakpoints, std::vector<std::vector<Rational>> coefficients) {
  require(breakpoints.size() >= 2, ErrorCode::Domain, "piecewise polynomial needs at least two breakpoints");
  require(coefficients.size() + 1 == breakpoints.size(), ErrorCode::Domain,
          "segment count must be breakpoint count minus one");
  require(breakpoints.front() == 0, ErrorCode::Domain, "first breakpoint must be 0");
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    require(breakpoints[i] < breakpoints[i + 1], ErrorCode::Domain,
            "breakpoints must be strictly increasing");
  }
  PiecewisePolynomial out;
  out.breakpoints_ = std::move(breakpoints);
  out.coefficients_ = std::move(coefficients);
  out.normalize();
  return out;
}

PiecewisePolynomial PiecewisePolynomial::constant(const Rational& value, const Rational& horizon) {
  return from_segments({Rational(0), horizon}, {{value}});
}

PiecewisePolynomial PiecewisePolynomial::linear(const Rational& a0, const Rational& a1,
                                                const Rational& horizon) {
  return from_segments({Rational(0), horizon}, {{a0, a1}});
}

void PiecewisePolynomial::normalize() {
  for (auto& c : coefficients_) trim_trailing_zeros(c);
  // merge adjacent segments carrying the same polynomial
  size_t write = 0;
  for (size_t read = 1; read < coefficients_.size(); ++read) {
    if (coefficients_[read] == coefficients_[write]) {
      breakpoints_[write + 1] = breakpoints_[read + 1];
    } else {
      ++write;
      if (write != read) coefficients_[write] = std::move(coefficients_[read]);
      breakpoints_[write + 1] = breakpoints_[read + 1];
    }
  }
  coefficients_.resize(write + 1);
  breakpoints_.resize(write + 2);
}

Rational PiecewisePolynomial::evaluate(const Rational& u) const {
  require(u >= 0 && u <= horizon(), ErrorCode::Domain, "evaluation point outside [0, horizon]");
  size_t seg = 0;
  if (u > 0) {
    // left-continuous: pick the segment whose left endpoint is strictly below u
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), u);
    if (it == breakpoints_.end() || *it >= u) --it;
    seg = static_cast<size_t>(it - breakpoints_.begin());
    if (seg >= coefficients_.size()) seg = coefficients_.size() - 1;
  }
  return eval_poly(coefficients_[seg], u);
}

Rational PiecewisePolynomial::integrate(const Rational& a, const Rational& b) const {
  require(a >= 0 && b <= horizon() && a <= b, ErrorCode::Domain,
          "integration bounds outside [0, horizon]");
  Rational total = 0;
  for (size_t i = 0; i < coefficients_.size(); ++i) {
    Rational lo = std::max(breakpoints_[i], a);
    Rational hi = std::min(breakpoints_[i + 1], b);
    if (lo >= hi) continue;
    auto anti = antiderive_poly(coefficients_[i], Rational(0));
    total += eval_poly(anti, hi) - eval_poly(anti, lo);
  }
  return total;
}

PiecewisePolynomial PiecewisePolynomial::derivative() const {
  PiecewisePolynomial out;
  out.breakpoints_ = breakpoints_;
  out.coefficients_.reserve(coefficients_.size());
  for (const auto& c : coefficients_) {
    std::vector<Rational> d;
    for (size_t j = 1; j < c.size(); ++j) d.push_back(c[j] * Rational(j));
    if (d.empty()) d.push_back(Rational(0));
    out.coefficients_.push_back(std::move(d));
  }
  out.normalize();
  return out;
}

PiecewisePolynomial PiecewisePolynomial::antiderivative() const {
  PiecewisePolynomial out;
  out.breakpoints_ = breakpoints_;
  Rational running = 0;  // value at the left edge of the current segment
  for (size_t i = 0; i < coefficients_.size(); ++i) {
    auto anti = antiderive_poly(coefficients_[i], Rational(0));
    Rational at_left = eval_poly(anti, breakpoints_[i]);
    anti[0] = running - at_left;
    out.coefficients_.push_back(anti);
    running = eval_poly(out.coefficients_.back(), breakpoints_[i + 1]);
  }
  out.normalize();
  return out;
}

PiecewisePolynomial PiecewisePolynomial::integral_to_horizon() const {
  PiecewisePolynomial anti = antiderivative();
  Rational total = anti.evaluate(horizon());
  return constant(total, horizon()) - anti;
}

namespace {

// Shared breakpoint refinement for binary arithmetic.
std::vector<Rational> merged_breakpoints(const std::vector<Rational>& a,
                                         const std::vector<Rational>& b) {
  std::vector<Rational> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

PiecewisePolynomial PiecewisePolynomial::operator+(const PiecewisePolynomial& other) const {
  require(horizon() == other.horizon(), ErrorCode::Domain, "horizon mismatch in kernel addition");
  auto bps = merged_breakpoints(breakpoints_, other.breakpoints_);
  std::vector<std::vector<Rational>> coeffs;
  coeffs.reserve(bps.size() - 1);
  for (size_t i = 0; i + 1 < bps.size(); ++i) {
    Rational mid = (bps[i] + bps[i + 1]) / 2;
    // locate source segments by midpoint; both polys cover [0, horizon]
    auto pick = [&](const PiecewisePolynomial& p) -> const std::vector<Rational>& {
      auto it = std::upper_bound(p.breakpoints_.begin(), p.breakpoints_.end(), mid);
      size_t seg = static_cast<size_t>(it - p.breakpoints_.begin()) - 1;
      if (seg >= p.coefficients_.size()) seg = p.coefficients_.size() - 1;
      return p.coefficients_[seg];
    };
    const auto& ca = pick(*this);
    const auto& cb = pick(other);
    std::vector<Rational> c(std::max(ca.size(), cb.size()), Rational(0));
    for (size_t j = 0; j < ca.size(); ++j) c[j] += ca[j];
    for (size_t j = 0; j < cb.size(); ++j) c[j] += cb[j];
    coeffs.push_back(std::move(c));
  }
  return from_segments(std::move(bps), std::move(coeffs));
}

PiecewisePolynomial PiecewisePolynomial::operator-(const PiecewisePolynomial& other) const {
  return *this + other.scaled(-1);
}

PiecewisePolynomial PiecewisePolynomial::operator*(const PiecewisePolynomial& other) const {
  require(horizon() == other.horizon(), ErrorCode::Domain, "horizon mismatch in kernel product");
  auto bps = merged_breakpoints(breakpoints_, other.breakpoints_);
  std::vector<std::vector<Rational>> coeffs;
  coeffs.reserve(bps.size() - 1);
  for (size_t i = 0; i + 1 < bps.size(); ++i) {
    Rational mid = (bps[i] + bps[i + 1]) / 2;
    auto pick = [&](const PiecewisePolynomial& p) -> const std::vector<Rational>& {
      auto it = std::upper_bound(p.breakpoints_.begin(), p.breakpoints_.end(), mid);
      size_t seg = static_cast<size_t>(it - p.breakpoints_.begin()) - 1;
      if (seg >= p.coefficients_.size()) seg = p.coefficients_.size() - 1;
      return p.coefficients_[seg];
    };
    const auto& ca = pick(*this);
    const auto& cb = pick(other);
    std::vector<Rational> c(ca.size() + cb.size() - 1, Rational(0));
    for (size_t j = 0; j < ca.size(); ++j) {
      for (size_t k = 0; k < cb.size(); ++k) c[j + k] += ca[j] * cb[k];
    }
    coeffs.push_back(std::move(c));
  }
  return from_segments(std::move(bps), std::move(coeffs));
}

PiecewisePolynomial PiecewisePolynomial::scaled(const Rational& factor) const {
  PiecewisePolynomial out = *this;
  for (auto& c : out.coefficients_) {
    for (auto& v : c) v *= factor;
  }
  out.normalize();
  return out;
}

bool PiecewisePolynomial::is_zero() const {
  return coefficients_.size() == 1 && coefficients_[0].size() == 1 && coefficients_[0][0] == 0;
}

bool PiecewisePolynomial::is_constant() const {
  return coefficients_.size() == 1 && coefficients_[0].size() == 1;
}

Rational PiecewisePolynomial::constant_value() const {
  require(is_constant(), ErrorCode::Domain, "kernel is not constant");
  return coefficients_[0][0];
}

unsigned PiecewisePolynomial::degree() const {
  size_t deg = 0;
  for (const auto& c : coefficients_) deg = std::max(deg, c.size() - 1);
  return static_cast<unsigned>(deg);
}

std::strong_ordering PiecewisePolynomial::compare(const PiecewisePolynomial& other) const {
  if (auto c = breakpoints_.size() <=> other.breakpoints_.size(); c != 0) return c;
  for (size_t i = 0; i < breakpoints_.size(); ++i) {
    if (auto c = compare_rational(breakpoints_[i], other.breakpoints_[i]); c != 0) return c;
  }
  for (size_t i = 0; i < coefficients_.size(); ++i) {
    if (auto c = coefficients_[i].size() <=> other.coefficients_[i].size(); c != 0) return c;
    for (size_t j = 0; j < coefficients_[i].size(); ++j) {
      if (auto c = compare_rational(coefficients_[i][j], other.coefficients_[i][j]); c != 0) return c;
    }
  }
  return std::strong_ordering::equal;
}

}  // namespace martrep
