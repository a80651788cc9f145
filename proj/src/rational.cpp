#include "rational.hpp"

#include <cctype>

namespace martrep {

namespace {

bool is_integer_text(std::string_view s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

}  // namespace

Rational rational_from_string(std::string_view text) {
  // strip surrounding whitespace
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  require(!text.empty(), ErrorCode::Parse, "empty rational literal");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string_view num = text.substr(0, slash);
    std::string_view den = text.substr(slash + 1);
    require(is_integer_text(num) && is_integer_text(den), ErrorCode::Parse,
            "malformed rational literal: " + std::string(text));
    BigInt p{std::string(num)};
    BigInt q{std::string(den)};
    require(q != 0, ErrorCode::Parse, "zero denominator in rational literal");
    return Rational(p, q);
  }

  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    require(!frac.empty() && is_integer_text(frac) && frac[0] != '-' && frac[0] != '+',
            ErrorCode::Parse, "malformed decimal literal: " + std::string(text));
    bool negative = !whole.empty() && whole[0] == '-';
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.remove_prefix(1);
    require(whole.empty() || is_integer_text(whole), ErrorCode::Parse,
            "malformed decimal literal: " + std::string(text));
    BigInt ip = whole.empty() ? BigInt(0) : BigInt(std::string(whole));
    BigInt fp{std::string(frac)};
    BigInt scale = 1;
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    Rational out = Rational(ip) + Rational(fp, scale);
    return negative ? -out : out;
  }

  require(is_integer_text(text), ErrorCode::Parse,
          "malformed rational literal: " + std::string(text));
  return Rational(BigInt(std::string(text)));
}

std::string rational_to_string(const Rational& value) {
  if (denominator(value) == 1) return numerator(value).str();
  return numerator(value).str() + "/" + denominator(value).str();
}

Rational rational_pow(const Rational& base, unsigned exponent) {
  Rational out = 1;
  Rational acc = base;
  unsigned e = exponent;
  while (e != 0) {
    if (e & 1u) out *= acc;
    e >>= 1u;
    if (e != 0) acc *= acc;
  }
  return out;
}

std::optional<Rational> rational_sqrt(const Rational& value) {
  require(value >= 0, ErrorCode::Domain, "square root of negative rational");
  if (value == 0) return Rational(0);
  BigInt p = numerator(value);
  BigInt q = denominator(value);
  BigInt sp = sqrt(p);
  BigInt sq = sqrt(q);
  if (sp * sp != p || sq * sq != q) return std::nullopt;
  return Rational(sp, sq);
}

Rational factorial(unsigned n) {
  BigInt out = 1;
  for (unsigned i = 2; i <= n; ++i) out *= i;
  return Rational(out);
}

Rational binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt out = 1;
  for (unsigned i = 0; i < k; ++i) {
    out *= (n - i);
    out /= (i + 1);
  }
  return Rational(out);
}

Rational falling_factorial(unsigned n, unsigned l) {
  if (l > n) return 0;
  BigInt out = 1;
  for (unsigned i = 0; i < l; ++i) out *= (n - i);
  return Rational(out);
}

}  // namespace martrep
