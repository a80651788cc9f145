#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "builtins.hpp"
#include "rng.hpp"
#include "wiener_functional.hpp"

using namespace martrep;

namespace {

PathPrefix unit_slope_path(double t, double horizon) {
  std::vector<double> times, values;
  for (int i = 0; i <= 4; ++i) {
    times.push_back(t * i / 4);
    values.push_back(t * i / 4);
  }
  return PathPrefix::create(times, values, horizon);
}

PathPrefix random_full_path(uint64_t seed, size_t steps, double horizon) {
  std::vector<double> times{0.0}, values{0.0};
  double dt = horizon / static_cast<double>(steps);
  double level = 0.0;
  for (size_t i = 1; i <= steps; ++i) {
    times.push_back(dt * static_cast<double>(i));
    level += rng::normal_draw(seed, 0, i) * std::sqrt(dt);
    values.push_back(level);
  }
  times.back() = horizon;
  return PathPrefix::create(times, values, horizon);
}

}  // namespace

TEST_CASE("constructors produce the expected shape") {
  auto w = wiener_power(1, 1);
  CHECK(w.basis_size() == 1);
  CHECK(w.term_count() == 1);
  CHECK(w.terms()[0].exponents[0] == 1);
  CHECK(w.basis()[0].is_constant());

  auto w2 = wiener_power(2, 1);
  CHECK(w2.terms()[0].exponents[0] == 2);
  CHECK(w2.terms()[0].exp_arg.is_zero());

  auto c = WienerFunctional::constant(Rational(5, 3), 1);
  CHECK(c.basis_size() == 0);
  CHECK(c.term_count() == 1);

  CHECK(WienerFunctional::constant(0, 1).is_zero());
}

TEST_CASE("exp_quadratic validates its quadratic form") {
  auto kernel = PiecewisePolynomial::constant(1, 1);
  auto q = QuadraticForm::zero(2);
  CHECK_THROWS_AS(WienerFunctional::exp_quadratic({kernel}, q), Error);  // dim mismatch
  auto q1 = QuadraticForm::zero(1);
  q1.matrix[0] = Rational(-1, 2);
  auto f = WienerFunctional::exp_quadratic({kernel}, q1);
  CHECK(f.term_count() == 1);
  auto bad_horizon = PiecewisePolynomial::constant(1, 2);
  CHECK_THROWS_AS(WienerFunctional::exp_quadratic({kernel, bad_horizon}, QuadraticForm::zero(2)),
                  Error);
}

TEST_CASE("sum and product keep canonical form") {
  auto w = wiener_power(1, 1);
  auto w2 = wiener_power(2, 1);

  CHECK(w + w == w.scaled(2));
  CHECK((w + w.scaled(-1)).is_zero());
  CHECK(w * w == w2);
  CHECK(w.power(3) == w * w * w);
  CHECK(w.power(0) == WienerFunctional::constant(1, 1));

  // associativity and distributivity hold as object identities
  auto e = exp_wiener(1);
  CHECK(((w + w2) + e) == (w + (w2 + e)));
  CHECK(((w + w2) * e) == (w * e + w2 * e));

  // horizons must match
  CHECK_THROWS_AS(w + wiener_power(1, 2), Error);
}

TEST_CASE("products merge distinct kernel bases") {
  auto e2 = exp_integral(1);   // kernel 1-u
  auto w = wiener_power(1, 1); // kernel 1
  auto p = e2 * w;
  CHECK(p.basis_size() == 2);
  CHECK(p.term_count() == 1);
  // multiplying exponentials adds their quadratic forms
  auto ee = e2 * e2;
  CHECK(ee.basis_size() == 1);
  CHECK(ee.terms()[0].exp_arg.linear[0] == Rational(-2));
}

TEST_CASE("malliavin derivative of the half square is the coordinate") {
  auto half_sq = wiener_power(2, 1).scaled(Rational(1, 2));
  auto d = half_sq.malliavin_derivative("s");
  REQUIRE(d.free_vars() == std::vector<std::string>{"s"});
  CHECK(d.term_count() == 1);
  CHECK(d.terms()[0].coeff == Rational(1));
  CHECK(d.terms()[0].exponents[0] == 1);
  CHECK(d.terms()[0].time_factors.empty());  // constant kernel factor folds away

  // derivative of a constant is zero (but keeps the variable)
  auto dc = WienerFunctional::constant(3, 1).malliavin_derivative("s");
  CHECK(dc.is_zero());
  CHECK(dc.free_vars().size() == 1);
}

TEST_CASE("second derivative of the integrated-path exponential") {
  // F = exp(-int (T-u) dW); D_s^2 F = (T-s)^2 F
  auto f = exp_integral(1);
  size_t idx = 0;
  auto d1 = f.malliavin_derivative("s");
  auto d2 = d1.derivative_in_var(0);
  (void)idx;
  CHECK(d2.free_vars() == std::vector<std::string>{"s"});
  CHECK(d2.term_count() == 1);
  // substituting s = 1/4 leaves (3/4)^2 * F
  CHECK(d2.substituted(0, Rational(1, 4)) == f.scaled(Rational(9, 16)));
  // substituting at the horizon uses the left-continuous kernel value (T-s -> 0)
  CHECK(d2.substituted(0, 1).is_zero());
}

TEST_CASE("malliavin_at_time matches hand-computed values") {
  auto w3 = wiener_power(3, 1);
  CHECK(w3.malliavin_at_time(2, 1) == wiener_power(1, 1).scaled(6));
  CHECK(w3.malliavin_at_time(4, 1).is_zero());
  CHECK(wiener_power(2, 1).malliavin_at_time(1, 1) == wiener_power(1, 1).scaled(2));
  CHECK(w3.malliavin_at_time(0, Rational(1, 2)) == w3);
  CHECK_THROWS_AS(w3.malliavin_at_time(1, 0), Error);
  CHECK_THROWS_AS(w3.malliavin_at_time(1, 2), Error);
}

TEST_CASE("derivatives commute") {
  auto f = heat_kernel(2, 1) * wiener_power(1, 1) + exp_integral(1);
  size_t ia = 0, ib = 0;
  auto ab = f.with_var("a", ia).derivative_in_var(ia).with_var("b", ib).derivative_in_var(ib);
  auto ba = f.with_var("b", ib).derivative_in_var(ib).with_var("a", ia).derivative_in_var(ia);
  // substitute in both orders; the results are identical objects
  auto ab_fixed = ab.substituted(1, Rational(2, 3)).substituted(0, Rational(1, 3));
  auto ba_fixed = ba.substituted(1, Rational(1, 3)).substituted(0, Rational(2, 3));
  CHECK(ab_fixed == ba_fixed);
}

TEST_CASE("derivative grouping is associative under full-path evaluation") {
  auto f = exp_wiener(1) * wiener_power(2, 1);
  auto once_twice = f.malliavin_at_time(1, 1).malliavin_at_time(2, 1);
  auto all_three = f.malliavin_at_time(3, 1);
  CHECK(once_twice == all_three);
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto path = random_full_path(seed, 16, 1.0);
    double a = once_twice.evaluate_full_path(path);
    double b = all_three.evaluate_full_path(path);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("Leibniz rule holds exactly") {
  auto f = heat_kernel(2, 1);
  auto g = exp_integral(1) * wiener_power(1, 1);
  auto left = (f * g).malliavin_derivative("s");
  auto right = f.malliavin_derivative("s") * g + f * g.malliavin_derivative("s");
  CHECK(left == right);
  // and numerically on a random path after substitution
  auto ls = left.substituted(0, Rational(3, 4));
  auto rs = right.substituted(0, Rational(3, 4));
  for (uint64_t seed = 11; seed <= 13; ++seed) {
    auto path = random_full_path(seed, 8, 1.0);
    CHECK(ls.evaluate_full_path(path) ==
          doctest::Approx(rs.evaluate_full_path(path)).epsilon(1e-12));
  }
}

TEST_CASE("with_var rejects duplicate names") {
  auto f = wiener_power(1, 1);
  size_t idx = 0;
  auto g = f.with_var("s", idx);
  CHECK(idx == 0);
  CHECK_THROWS_AS(g.with_var("s", idx), Error);
}

TEST_CASE("freeze_evaluate on the zero and smooth paths") {
  auto f = exp_integral(1);
  auto zero = PathPrefix::zero(0.5, 4, 1.0);
  CHECK(f.freeze_evaluate(zero) == 1.0);

  // W(u) = u up to t = 1/2: exp(-(int_0^1/2 u du) - 0.5*0.5) = exp(-3/8)
  auto smooth = unit_slope_path(0.5, 1.0);
  CHECK(f.freeze_evaluate(smooth) == doctest::Approx(std::exp(-0.375)).epsilon(1e-14));

  auto ex1 = heat_kernel(2, 1);
  CHECK(ex1.freeze_evaluate(PathPrefix::zero(0.0, 0, 1.0)) == 1.0);
}

TEST_CASE("freeze_evaluate binds free time variables") {
  auto f = exp_integral(1);
  auto d = f.malliavin_derivative("s");  // -(1-s) exp(-Z)
  auto path = PathPrefix::zero(0.5, 2, 1.0);
  double v = d.freeze_evaluate(path, {{"s", 0.75}});
  CHECK(v == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK_THROWS_AS(d.freeze_evaluate(path), Error);                    // unbound
  CHECK_THROWS_AS(d.freeze_evaluate(path, {{"s", 0.25}}), Error);     // before t
  CHECK_THROWS_AS(d.freeze_evaluate(path, {{"s", 1.5}}), Error);      // past horizon
}

TEST_CASE("freeze_evaluate linearity") {
  auto f = heat_kernel(2, 1);
  auto g = exp_integral(1);
  auto path = unit_slope_path(0.5, 1.0);
  double sum = (f + g).freeze_evaluate(path);
  CHECK(sum == doctest::Approx(f.freeze_evaluate(path) + g.freeze_evaluate(path)).epsilon(1e-14));
}

TEST_CASE("freeze overflow raises a numeric error") {
  auto f = exp_wiener(1).power(40);  // exp(40 W(T))
  auto path = PathPrefix::create({0.0, 0.5}, {0.0, 1e7}, 1.0);
  CHECK_THROWS_AS(f.freeze_evaluate(path), Error);
  try {
    f.freeze_evaluate(path);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
  }
}

TEST_CASE("evaluate_full_path on closed-form cases") {
  auto w = wiener_power(1, 1);
  auto path = random_full_path(7, 12, 1.0);
  CHECK(w.evaluate_full_path(path) == doctest::Approx(path.end_value()).epsilon(1e-14));

  auto w2 = wiener_power(2, 1);
  auto p07 = PathPrefix::create({0.0, 1.0}, {0.0, 0.7}, 1.0);
  CHECK(w2.evaluate_full_path(p07) == doctest::Approx(0.49).epsilon(1e-14));

  // exp(-int_0^1 W du) along W(u) = u is exp(-1/2)
  auto f = exp_integral(1);
  auto full = unit_slope_path(1.0, 1.0);
  CHECK(f.evaluate_full_path(full) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));

  // freezing at t = T coincides with the full-path value
  CHECK(f.freeze_evaluate(full) == f.evaluate_full_path(full));

  CHECK_THROWS_AS(f.evaluate_full_path(PathPrefix::zero(0.5, 2, 1.0)), Error);
  auto with_var_f = f.malliavin_derivative("s");
  CHECK_THROWS_AS(with_var_f.evaluate_full_path(full), Error);
}

TEST_CASE("serialization round-trips bit-exactly") {
  auto f = heat_kernel(2, 1) * wiener_power(2, 1) + exp_integral(1).scaled(Rational(3, 7));
  auto d = f.malliavin_derivative("u1");
  for (const auto& probe : {f, d}) {
    auto text = probe.serialize();
    auto back = WienerFunctional::deserialize(text);
    CHECK(back == probe);
    CHECK(back.serialize() == text);
  }
}

TEST_CASE("deserialize rejects malformed input") {
  for (const char* bad :
       {"", "{", "[1,2]", "{\"horizon\":\"1\"}", "{\"horizon\":\"x\",\"basis\":[],\"free_vars\":[],\"terms\":[]}"}) {
    CHECK_THROWS_AS(WienerFunctional::deserialize(bad), Error);
    try {
      WienerFunctional::deserialize(bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
    }
  }
}

TEST_CASE("canonical form merges duplicate kernels additively") {
  // building the same kernel twice through different routes collapses the basis
  auto a = wiener_power(1, 1) * exp_wiener(1);
  CHECK(a.basis_size() == 1);
  CHECK(a.terms()[0].exponents[0] == 1);
  CHECK(a.terms()[0].exp_arg.linear[0] == Rational(1));
}

TEST_CASE("compiled evaluator matches freeze on full paths") {
  auto f = heat_kernel(2, 1) * wiener_power(2, 1) + exp_integral(1);
  WienerFunctional::Compiled compiled(f);
  auto path = random_full_path(21, 10, 1.0);
  std::vector<double> z(f.basis_size());
  for (size_t i = 0; i < f.basis_size(); ++i) z[i] = stieltjes_along_prefix(f.basis()[i], path);
  CHECK(compiled(z.data()) == doctest::Approx(f.evaluate_full_path(path)).epsilon(1e-13));
}
