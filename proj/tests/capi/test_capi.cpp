// Exercises the shared-library C interface through the public header only.
// Nothing here includes core headers: what this file can do, any C client
// can do.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <martrep/martrep.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

namespace {

// Releases the handle/message when the scope ends; keeps failure paths leak-free.
struct StringGuard {
  char* text = nullptr;
  ~StringGuard() { mr_free_string(text); }
};

struct FunctionalGuard {
  mr_functional_t* f = nullptr;
  ~FunctionalGuard() { mr_functional_destroy(f); }
};

struct PathGuard {
  mr_path_t* p = nullptr;
  ~PathGuard() { mr_path_destroy(p); }
};

mr_functional_t* must_build(mr_status (*builder)(const char*, mr_functional_t**, char**),
                            const char* horizon) {
  mr_functional_t* f = nullptr;
  REQUIRE(builder(horizon, &f, nullptr) == MR_OK);
  REQUIRE(f != nullptr);
  return f;
}

}  // namespace

TEST_CASE("version string is present and stable in form") {
  const char* v = mr_version();
  REQUIRE(v != nullptr);
  CHECK(std::strcmp(v, "0.1.0") == 0);
}

TEST_CASE("path lifecycle and accessors") {
  const double times[] = {0.0, 0.25, 0.5};
  const double values[] = {0.0, 0.1, 0.3};
  PathGuard path;
  REQUIRE(mr_path_create(times, values, 3, 1.0, &path.p, nullptr) == MR_OK);
  CHECK(mr_path_end_time(path.p) == doctest::Approx(0.5));
  CHECK(mr_path_end_value(path.p) == doctest::Approx(0.3));
  CHECK(mr_path_horizon(path.p) == doctest::Approx(1.0));
  CHECK(mr_path_sample_count(path.p) == 3);

  const double more_times[] = {0.75, 1.0};
  const double more_values[] = {0.2, 0.4};
  PathGuard longer;
  REQUIRE(mr_path_extended(path.p, more_times, more_values, 2, &longer.p, nullptr) == MR_OK);
  CHECK(mr_path_sample_count(longer.p) == 5);
  CHECK(mr_path_end_time(longer.p) == doctest::Approx(1.0));
  // the original is untouched
  CHECK(mr_path_sample_count(path.p) == 3);

  PathGuard flat;
  REQUIRE(mr_path_zero(0.5, 4, 1.0, &flat.p, nullptr) == MR_OK);
  CHECK(mr_path_end_value(flat.p) == 0.0);
  CHECK(mr_path_sample_count(flat.p) == 5);
}

TEST_CASE("path creation rejects a bad grid with a message") {
  const double times[] = {0.0, 0.5, 0.5};
  const double values[] = {0.0, 0.1, 0.2};
  mr_path_t* path = reinterpret_cast<mr_path_t*>(0x1);  // sentinel: must stay untouched
  StringGuard err;
  const mr_status rc = mr_path_create(times, values, 3, 1.0, &path, &err.text);
  CHECK(rc == MR_ERR_DOMAIN);
  CHECK(err.text != nullptr);
  CHECK(path == reinterpret_cast<mr_path_t*>(0x1));
}

TEST_CASE("builders, serialize, parse round trip") {
  FunctionalGuard f;
  f.f = must_build(mr_functional_exp_integral, "1");

  StringGuard text;
  REQUIRE(mr_functional_serialize(f.f, &text.text, nullptr) == MR_OK);
  REQUIRE(text.text != nullptr);

  FunctionalGuard parsed;
  REQUIRE(mr_functional_parse(text.text, &parsed.f, nullptr) == MR_OK);

  StringGuard again;
  REQUIRE(mr_functional_serialize(parsed.f, &again.text, nullptr) == MR_OK);
  CHECK(std::string(text.text) == std::string(again.text));
}

TEST_CASE("parse rejects garbage with MR_ERR_PARSE") {
  mr_functional_t* f = nullptr;
  StringGuard err;
  CHECK(mr_functional_parse("not a functional", &f, &err.text) == MR_ERR_PARSE);
  CHECK(err.text != nullptr);
  CHECK(f == nullptr);
}

TEST_CASE("null argument reports MR_ERR_USAGE") {
  mr_functional_t* f = nullptr;
  StringGuard err;
  CHECK(mr_functional_wiener_power(2, nullptr, &f, &err.text) == MR_ERR_USAGE);
  CHECK(err.text != nullptr);
}

TEST_CASE("rational string arguments reject malformed text") {
  mr_functional_t* f = nullptr;
  CHECK(mr_functional_wiener_power(2, "1/0", &f, nullptr) == MR_ERR_PARSE);
  CHECK(mr_functional_wiener_power(2, "abc", &f, nullptr) == MR_ERR_PARSE);
  CHECK(f == nullptr);
}

TEST_CASE("heat kernel domain validation surfaces as MR_ERR_DOMAIN") {
  mr_functional_t* f = nullptr;
  StringGuard err;
  // tau - T = 1/3 is not a perfect rational square
  CHECK(mr_functional_heat_kernel("4/3", "1", &f, &err.text) == MR_ERR_DOMAIN);
  CHECK(err.text != nullptr);
}

TEST_CASE("algebra: sum, product, scale, power") {
  FunctionalGuard w2, w3;
  mr_functional_t* tmp = nullptr;
  REQUIRE(mr_functional_wiener_power(2, "1", &tmp, nullptr) == MR_OK);
  w2.f = tmp;
  REQUIRE(mr_functional_wiener_power(3, "1", &tmp, nullptr) == MR_OK);
  w3.f = tmp;

  FunctionalGuard sum;
  REQUIRE(mr_functional_sum(w2.f, w3.f, &sum.f, nullptr) == MR_OK);
  CHECK(mr_functional_term_count(sum.f) == 2);

  FunctionalGuard product;
  REQUIRE(mr_functional_product(w2.f, w3.f, &product.f, nullptr) == MR_OK);

  FunctionalGuard fifth;
  REQUIRE(mr_functional_wiener_power(5, "1", &fifth.f, nullptr) == MR_OK);
  StringGuard lhs, rhs;
  REQUIRE(mr_functional_serialize(product.f, &lhs.text, nullptr) == MR_OK);
  REQUIRE(mr_functional_serialize(fifth.f, &rhs.text, nullptr) == MR_OK);
  CHECK(std::string(lhs.text) == std::string(rhs.text));  // W^2 * W^3 == W^5 canonically

  FunctionalGuard scaled;
  REQUIRE(mr_functional_scale(w2.f, "-3/2", &scaled.f, nullptr) == MR_OK);
  FunctionalGuard squared;
  REQUIRE(mr_functional_power(scaled.f, 2, &squared.f, nullptr) == MR_OK);

  const double times[] = {0.0, 1.0};
  const double values[] = {0.0, 0.5};
  PathGuard path;
  REQUIRE(mr_path_create(times, values, 2, 1.0, &path.p, nullptr) == MR_OK);
  double value = 0.0;
  REQUIRE(mr_functional_evaluate_full_path(squared.f, path.p, &value, nullptr) == MR_OK);
  // (-3/2 W(1)^2)^2 at W(1) = 1/2 is (9/4) * (1/16)
  CHECK(value == doctest::Approx(9.0 / 64.0).epsilon(1e-12));
}

TEST_CASE("endpoint derivative matches the hand value 6 W(T)") {
  FunctionalGuard w3;
  REQUIRE(mr_functional_wiener_power(3, "1", &w3.f, nullptr) == MR_OK);
  FunctionalGuard d2;
  REQUIRE(mr_functional_malliavin_at_time(w3.f, 2, "1", &d2.f, nullptr) == MR_OK);
  CHECK(mr_functional_term_count(d2.f) == 1);

  const double times[] = {0.0, 1.0};
  const double values[] = {0.0, 0.7};
  PathGuard path;
  REQUIRE(mr_path_create(times, values, 2, 1.0, &path.p, nullptr) == MR_OK);
  double value = 0.0;
  REQUIRE(mr_functional_evaluate_full_path(d2.f, path.p, &value, nullptr) == MR_OK);
  CHECK(value == doctest::Approx(4.2).epsilon(1e-12));
}

TEST_CASE("freeze on a known path") {
  FunctionalGuard f;
  f.f = must_build(mr_functional_exp_integral, "1");
  PathGuard path;
  REQUIRE(mr_path_zero(0.5, 8, 1.0, &path.p, nullptr) == MR_OK);
  double value = 0.0;
  REQUIRE(mr_functional_freeze(f.f, path.p, &value, nullptr) == MR_OK);
  CHECK(value == doctest::Approx(1.0).epsilon(1e-14));  // zero path: exp(0)
}

TEST_CASE("horizon accessor and exact scalar arithmetic") {
  FunctionalGuard f;
  REQUIRE(mr_functional_wiener_power(2, "3/4", &f.f, nullptr) == MR_OK);
  StringGuard horizon;
  REQUIRE(mr_functional_horizon(f.f, &horizon.text, nullptr) == MR_OK);
  CHECK(std::string(horizon.text) == "3/4");

  StringGuard t;
  REQUIRE(mr_rational_fma("1", -4, "1/6", &t.text, nullptr) == MR_OK);
  CHECK(std::string(t.text) == "1/3");

  StringGuard normalized;
  REQUIRE(mr_rational_fma("0.250", 0, "0", &normalized.text, nullptr) == MR_OK);
  CHECK(std::string(normalized.text) == "1/4");

  char* out = nullptr;
  CHECK(mr_rational_fma("1", 1, "1/x", &out, nullptr) == MR_ERR_PARSE);
  CHECK(out == nullptr);
}

TEST_CASE("gamma coefficients: text, float, exact") {
  StringGuard text;
  REQUIRE(mr_gamma_to_string(2, &text.text, nullptr) == MR_OK);
  CHECK(std::string(text.text) == "1/2*delta + 1/2*x^2");

  double value = 0.0;
  REQUIRE(mr_gamma_evaluate(1, 0.25, 0.5, &value, nullptr) == MR_OK);
  CHECK(value == doctest::Approx(-0.5).epsilon(1e-15));

  StringGuard exact;
  REQUIRE(mr_gamma_evaluate_exact(2, "1/4", "0", &exact.text, nullptr) == MR_OK);
  CHECK(std::string(exact.text) == "1/8");
}

TEST_CASE("backward step and sweep") {
  FunctionalGuard w2;
  REQUIRE(mr_functional_wiener_power(2, "1", &w2.f, nullptr) == MR_OK);

  FunctionalGuard stepped;
  REQUIRE(mr_bte_step(w2.f, "1", "1/4", "0", 2, 1000, &stepped.f, nullptr) == MR_OK);

  PathGuard start;
  REQUIRE(mr_path_zero(0.0, 0, 1.0, &start.p, nullptr) == MR_OK);
  double value = 0.0;
  REQUIRE(mr_bte_sweep(w2.f, start.p, 4, "1/4", 2, nullptr, 1000000, &value, nullptr) == MR_OK);
  CHECK(value == doctest::Approx(1.0).epsilon(1e-12));  // E[W(1)^2] exactly at order 2

  const double increments[] = {0.1, -0.2, 0.05, 0.3};
  double along = 0.0;
  REQUIRE(mr_bte_sweep(w2.f, start.p, 4, "1/4", 2, increments, 1000000, &along, nullptr) ==
          MR_OK);
  // order covers the degree, so the sweep is exact along any increment path
  CHECK(along == doctest::Approx(value).epsilon(1e-10));

  FunctionalGuard ew;
  ew.f = must_build(mr_functional_exp_wiener, "1");
  double frozen = 0.0, steered = 0.0;
  REQUIRE(mr_bte_sweep(ew.f, start.p, 4, "1/4", 2, nullptr, 1000000, &frozen, nullptr) == MR_OK);
  REQUIRE(mr_bte_sweep(ew.f, start.p, 4, "1/4", 2, increments, 1000000, &steered, nullptr) ==
          MR_OK);
  CHECK(frozen == doctest::Approx(std::pow(1.125, 4)).epsilon(1e-12));
  CHECK(steered != doctest::Approx(frozen));  // truncated orders feel the increments

  double bound = 0.0;
  REQUIRE(mr_bte_truncation_bound(1.0, 0.25, 1, &bound, nullptr) == MR_OK);
  CHECK(bound == doctest::Approx(0.25 * 0.25 / 2.0 / 0.75).epsilon(1e-15));
}

TEST_CASE("sweep term cap maps to MR_ERR_RESOURCE") {
  FunctionalGuard w6;
  REQUIRE(mr_functional_wiener_power(6, "1", &w6.f, nullptr) == MR_OK);
  PathGuard start;
  REQUIRE(mr_path_zero(0.0, 0, 1.0, &start.p, nullptr) == MR_OK);
  double value = 0.0;
  StringGuard err;
  CHECK(mr_bte_sweep(w6.f, start.p, 4, "1/4", 6, nullptr, 3, &value, &err.text) ==
        MR_ERR_RESOURCE);
  CHECK(err.text != nullptr);
}

TEST_CASE("series evaluation with row access") {
  FunctionalGuard f;
  f.f = must_build(mr_functional_exp_integral, "1");
  PathGuard path;
  REQUIRE(mr_path_zero(0.0, 0, 1.0, &path.p, nullptr) == MR_OK);

  double order2 = 0.0;
  REQUIRE(mr_dyson_term(f.f, path.p, 2, 1000000, &order2, nullptr) == MR_OK);
  CHECK(order2 == doctest::Approx(std::pow(1.0 / 6.0, 2) / 2.0).epsilon(1e-12));

  mr_dyson_result_t* result = nullptr;
  REQUIRE(mr_dyson_evaluate(f.f, path.p, 12, 1e-12, 1000000, &result, nullptr) == MR_OK);
  REQUIRE(result != nullptr);
  const size_t rows = mr_dyson_result_row_count(result);
  REQUIRE(rows >= 3);
  unsigned order = 99;
  double term = 0.0, partial = 0.0;
  mr_dyson_result_row(result, 0, &order, &term, &partial);
  CHECK(order == 0);
  CHECK(term == doctest::Approx(1.0));
  CHECK(partial == doctest::Approx(1.0));
  CHECK(mr_dyson_result_value(result) == doctest::Approx(std::exp(1.0 / 6.0)).epsilon(1e-10));
  CHECK(mr_dyson_result_tolerance_met(result) == 1);
  mr_dyson_result_destroy(result);

  // tolerance < 0 disables early stopping: all 13 orders are evaluated
  REQUIRE(mr_dyson_evaluate(f.f, path.p, 12, -1.0, 1000000, &result, nullptr) == MR_OK);
  CHECK(mr_dyson_result_row_count(result) == 13);
  CHECK(mr_dyson_result_tolerance_met(result) == 0);
  mr_dyson_result_destroy(result);
}

TEST_CASE("vertical derivative check through the C surface") {
  FunctionalGuard w2;
  REQUIRE(mr_functional_wiener_power(2, "1", &w2.f, nullptr) == MR_OK);
  const double times[] = {0.0, 0.5};
  const double values[] = {0.0, 0.4};
  PathGuard path;
  REQUIRE(mr_path_create(times, values, 2, 1.0, &path.p, nullptr) == MR_OK);

  double fd = 0.0, series = 0.0;
  REQUIRE(mr_vertical_derivative_check(w2.f, path.p, 1, 1e-5, 6, 1000000, &fd, &series,
                                       nullptr) == MR_OK);
  CHECK(series == doctest::Approx(0.8).epsilon(1e-10));  // d/dw (w^2 + (T-t)) = 2w
  CHECK(fd == doctest::Approx(series).epsilon(1e-6));

  StringGuard err;
  CHECK(mr_vertical_derivative_check(w2.f, path.p, 3, 1e-5, 6, 1000000, &fd, &series,
                                     &err.text) == MR_ERR_USAGE);
  CHECK(err.text != nullptr);
}

TEST_CASE("Monte Carlo and the closed-form oracle agree") {
  FunctionalGuard w2;
  REQUIRE(mr_functional_wiener_power(2, "1", &w2.f, nullptr) == MR_OK);
  const double times[] = {0.0, 0.25};
  const double values[] = {0.0, 0.3};
  PathGuard path;
  REQUIRE(mr_path_create(times, values, 2, 1.0, &path.p, nullptr) == MR_OK);

  double exact = 0.0;
  REQUIRE(mr_gaussian_moment_expectation(w2.f, "1/4", 0.3, &exact, nullptr) == MR_OK);
  CHECK(exact == doctest::Approx(0.09 + 0.75).epsilon(1e-14));

  double mean = 0.0, se = 0.0;
  uint64_t used = 0, bad = 0;
  REQUIRE(mr_mc_conditional_expectation(w2.f, path.p, 20000, 7, 32, 0, &mean, &se, &used, &bad,
                                        nullptr) == MR_OK);
  CHECK(used == 20000);
  CHECK(bad == 0);
  CHECK(std::fabs(mean - exact) < 4.0 * se);
}

TEST_CASE("oracle scope violation maps to MR_ERR_UNSUPPORTED") {
  FunctionalGuard f;
  f.f = must_build(mr_functional_exp_integral, "1");
  double value = 0.0;
  StringGuard err;
  CHECK(mr_gaussian_moment_expectation(f.f, "1/2", 0.0, &value, &err.text) ==
        MR_ERR_UNSUPPORTED);
  CHECK(err.text != nullptr);
}

TEST_CASE("normal draws are deterministic in the key") {
  const double a = mr_normal_draw(1, 2, 3);
  CHECK(a == mr_normal_draw(1, 2, 3));
  CHECK(a != mr_normal_draw(1, 2, 4));
  CHECK(std::isfinite(a));
}
