#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "bte.hpp"
#include "builtins.hpp"
#include "oracle.hpp"
#include "rng.hpp"

using namespace martrep;

TEST_CASE("single step on the cubic reproduces the Gaussian moment") {
  auto f = wiener_power(3, 1);
  // one step across [t, T] with Delta = T - t = 1/4
  auto stepped = bte_step(f, 1, Rational(1, 4), 0, 3);
  auto path = PathPrefix::create({0.0, 0.75}, {0.0, 0.2}, 1.0);
  double w = 0.2;
  CHECK(stepped.freeze_evaluate(path) ==
        doctest::Approx(w * w * w + 3 * 0.25 * w).epsilon(1e-14));
}

TEST_CASE("a constant passes through any step unchanged") {
  auto c = WienerFunctional::constant(Rational(7, 3), 1);
  CHECK(bte_step(c, 1, Rational(1, 2), Rational(1, 5), 4) == c);
}

TEST_CASE("first-order step on the coordinate subtracts the increment") {
  auto w = wiener_power(1, 1);
  auto stepped = bte_step(w, 1, Rational(1, 4), Rational(3, 10), 1);
  CHECK(stepped == w + WienerFunctional::constant(Rational(-3, 10), 1));
}

TEST_CASE("step order beyond the polynomial degree changes nothing") {
  auto f = wiener_power(2, 1);
  auto l2 = bte_step(f, 1, Rational(1, 8), Rational(1, 7), 2);
  auto l6 = bte_step(f, 1, Rational(1, 8), Rational(1, 7), 6);
  CHECK(l2 == l6);
}

TEST_CASE("frozen sweep on the square is exact") {
  auto f = wiener_power(2, 1);
  BteConfig cfg;
  cfg.step_count = 4;
  cfg.step_size = Rational(1, 4);
  cfg.truncation_order = 2;
  auto p0 = PathPrefix::zero(0.0, 0, 1.0);
  CHECK(backward_sweep(f, cfg, p0) == doctest::Approx(1.0).epsilon(1e-14));

  // starting mid-path: E[W(1)^2 | F_{1/2}] = w^2 + 1/2
  BteConfig half = cfg;
  half.step_count = 2;
  auto mid = PathPrefix::create({0.0, 0.5}, {0.0, 0.4}, 1.0);
  CHECK(backward_sweep(f, half, mid) == doctest::Approx(0.16 + 0.5).epsilon(1e-14));
}

TEST_CASE("sweep config validation") {
  auto f = wiener_power(1, 1);
  auto p0 = PathPrefix::zero(0.0, 0, 1.0);
  BteConfig cfg;
  cfg.step_count = 0;
  cfg.step_size = Rational(1, 4);
  CHECK_THROWS_AS(backward_sweep(f, cfg, p0), Error);

  cfg.step_count = 2;
  cfg.step_size = 0;
  CHECK_THROWS_AS(backward_sweep(f, cfg, p0), Error);

  // M*Delta exceeding the horizon puts the start time below zero
  cfg.step_size = Rational(3, 4);
  CHECK_THROWS_AS(backward_sweep(f, cfg, p0), Error);

  // prefix must end at T - M*Delta
  cfg.step_size = Rational(1, 4);
  auto wrong_end = PathPrefix::create({0.0, 0.3}, {0.0, 0.1}, 1.0);
  CHECK_THROWS_AS(backward_sweep(f, cfg, wrong_end), Error);

  // increment list must match the step count
  cfg.increments = std::vector<double>{0.1};
  auto mid = PathPrefix::create({0.0, 0.5}, {0.0, 0.1}, 1.0);
  CHECK_THROWS_AS(backward_sweep(f, cfg, mid), Error);
}

TEST_CASE("path choice does not move exact sweeps") {
  // D^5 of W^4 vanishes, so any increment choice gives the same value at L = 4
  auto f = wiener_power(4, 1);
  BteConfig frozen;
  frozen.step_count = 3;
  frozen.step_size = Rational(1, 4);
  frozen.truncation_order = 4;
  auto prefix = PathPrefix::create({0.0, 0.25}, {0.0, 0.3}, 1.0);
  double reference = backward_sweep(f, frozen, prefix);
  CHECK(reference ==
        doctest::Approx(gaussian_moment_expectation(f, Rational(1, 4), 0.3)).epsilon(1e-13));

  for (uint64_t seed = 1; seed <= 20; ++seed) {
    BteConfig chosen = frozen;
    std::vector<double> incs;
    for (unsigned k = 0; k < frozen.step_count; ++k) {
      incs.push_back(rng::normal_draw(seed, k, 0) * 0.5);
    }
    chosen.increments = incs;
    double value = backward_sweep(f, chosen, prefix);
    CHECK(std::fabs(value - reference) / std::max(1.0, std::fabs(reference)) <= 1e-10);
  }
}

TEST_CASE("single random-increment step matches the moment oracle exactly") {
  // Theorem-level exactness: monomials up to degree 6 at L = n, arbitrary increment
  for (unsigned n = 1; n <= 6; ++n) {
    auto f = wiener_power(n, 1);
    for (uint64_t seed = 0; seed < 8; ++seed) {
      double t = 0.1 + 0.8 * rng::uniform01(seed, n, 0);
      double w = rng::normal_draw(seed, n, 1);
      double dw = rng::normal_draw(seed, n, 2);
      BteConfig cfg;
      cfg.step_count = 1;
      cfg.step_size = rational_from_double(1.0 - t);
      cfg.truncation_order = n;
      cfg.increments = std::vector<double>{dw};
      auto prefix = PathPrefix::create({0.0, t}, {0.0, w}, 1.0);
      double value = backward_sweep(f, cfg, prefix);
      double oracle = gaussian_moment_expectation(f, rational_from_double(t), w);
      CHECK(std::fabs(value - oracle) / std::max(1.0, std::fabs(oracle)) <= 1e-12);
    }
  }
}

TEST_CASE("multi-step frozen sweep approaches exp moments") {
  // frozen steps keep only even orders, so each step multiplies by
  // sum_{k <= L/2} (delta/2)^k / k!; at L = 2 the sweep value is (1+delta/2)^M
  auto p0 = PathPrefix::zero(0.0, 0, 1.0);
  auto f = exp_wiener(1);
  double previous_error = 1e300;
  for (unsigned m : {8u, 16u, 32u}) {
    BteConfig cfg;
    cfg.step_count = m;
    cfg.step_size = Rational(1, m);
    cfg.truncation_order = 2;
    double value = backward_sweep(f, cfg, p0);
    double closed = std::pow(1.0 + 0.5 / static_cast<double>(m), static_cast<double>(m));
    CHECK(value == doctest::Approx(closed).epsilon(1e-12));
    double error = std::fabs(value - std::exp(0.5));
    CHECK(error < previous_error);
    previous_error = error;
  }
  CHECK(previous_error < 8e-3);  // M = 32 sits within O(delta) of e^{1/2}
}

TEST_CASE("term cap fires as a resource error") {
  // frozen derivatives of W^6 stack four distinct monomials per step
  auto f = wiener_power(6, 1);
  BteConfig cfg;
  cfg.step_count = 2;
  cfg.step_size = Rational(1, 4);
  cfg.truncation_order = 6;
  cfg.term_cap = 3;
  auto prefix = PathPrefix::create({0.0, 0.5}, {0.0, 0.1}, 1.0);
  try {
    backward_sweep(f, cfg, prefix);
    FAIL("expected a resource error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Resource);
    // the offending step is named
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("truncation bound matches the printed form") {
  CHECK(truncation_bound(1.0, 0.5, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(truncation_bound(0.0, 0.5, 3) == 0.0);
  // raising the order improves the bound for small steps
  for (unsigned l = 0; l < 6; ++l) {
    CHECK(truncation_bound(2.0, 0.5, l + 1) <= truncation_bound(2.0, 0.5, l) / 2);
  }
  CHECK_THROWS_AS(truncation_bound(1.0, 1.0, 1), Error);
  CHECK_THROWS_AS(truncation_bound(1.0, 0.0, 1), Error);
}
