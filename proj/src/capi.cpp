// C API shim: thin handle wrappers plus exception-to-status translation.
// No logic lives here; every entry point delegates to the core library.

#include "martrep/martrep.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "bte.hpp"
#include "builtins.hpp"
#include "dyson.hpp"
#include "error.hpp"
#include "gamma.hpp"
#include "oracle.hpp"
#include "path.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "wiener_functional.hpp"

struct mr_functional_t {
  martrep::WienerFunctional impl;
};

struct mr_path_t {
  martrep::PathPrefix impl;
};

struct mr_dyson_result_t {
  martrep::DysonReport impl;
};

namespace {

char* copy_message(const std::string& message) {
  char* out = static_cast<char*>(std::malloc(message.size() + 1));
  if (out != nullptr) std::memcpy(out, message.c_str(), message.size() + 1);
  return out;
}

void set_error(char** errptr, const std::string& message) {
  if (errptr != nullptr) *errptr = copy_message(message);
}

// Runs `body`, translating exceptions into status codes. `body` must only
// write its outputs on success (all wrapped calls construct results fully
// before assigning through out-parameters).
template <typename Fn>
mr_status guarded(char** errptr, Fn&& body) {
  try {
    body();
    return MR_OK;
  } catch (const martrep::Error& e) {
    set_error(errptr, e.what());
    return static_cast<mr_status>(e.code());
  } catch (const std::bad_alloc&) {
    set_error(errptr, "out of memory");
    return MR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(errptr, e.what());
    return MR_ERR_INTERNAL;
  }
}

martrep::Rational parse_rational(const char* text, const char* what) {
  martrep::require(text != nullptr, martrep::ErrorCode::Usage,
                   std::string(what) + " must not be null");
  return martrep::rational_from_string(text);
}

const martrep::WienerFunctional& deref(const mr_functional_t* f, const char* what) {
  martrep::require(f != nullptr, martrep::ErrorCode::Usage,
                   std::string(what) + " must not be null");
  return f->impl;
}

const martrep::PathPrefix& deref(const mr_path_t* path, const char* what) {
  martrep::require(path != nullptr, martrep::ErrorCode::Usage,
                   std::string(what) + " must not be null");
  return path->impl;
}

void store(mr_functional_t** out, martrep::WienerFunctional value) {
  martrep::require(out != nullptr, martrep::ErrorCode::Usage, "output handle must not be null");
  *out = new mr_functional_t{std::move(value)};
}

void store(mr_path_t** out, martrep::PathPrefix value) {
  martrep::require(out != nullptr, martrep::ErrorCode::Usage, "output handle must not be null");
  *out = new mr_path_t{std::move(value)};
}

void store_string(char** out, const std::string& value) {
  martrep::require(out != nullptr, martrep::ErrorCode::Usage, "output pointer must not be null");
  char* copy = copy_message(value);
  if (copy == nullptr) throw std::bad_alloc();
  *out = copy;
}

void store_double(double* out, double value) {
  martrep::require(out != nullptr, martrep::ErrorCode::Usage, "output pointer must not be null");
  *out = value;
}

std::vector<double> copy_span(const double* data, size_t count, const char* what) {
  martrep::require(count == 0 || data != nullptr, martrep::ErrorCode::Usage,
                   std::string(what) + " must not be null when count > 0");
  return std::vector<double>(data, data + count);
}

}  // namespace

extern "C" {

const char* mr_version(void) { return MARTREP_VERSION; }

void mr_free_string(char* text) { std::free(text); }

/* ---- paths ---- */

mr_status mr_path_create(const double* times, const double* values, size_t count,
                         double horizon, mr_path_t** out, char** errptr) {
  return guarded(errptr, [&] {
    store(out, martrep::PathPrefix::create(copy_span(times, count, "times"),
                                           copy_span(values, count, "values"), horizon));
  });
}

mr_status mr_path_zero(double end_time, size_t steps, double horizon, mr_path_t** out,
                       char** errptr) {
  return guarded(errptr, [&] { store(out, martrep::PathPrefix::zero(end_time, steps, horizon)); });
}

mr_status mr_path_extended(const mr_path_t* path, const double* times, const double* values,
                           size_t count, mr_path_t** out, char** errptr) {
  return guarded(errptr, [&] {
    store(out, deref(path, "path").extended(copy_span(times, count, "times"),
                                            copy_span(values, count, "values")));
  });
}

void mr_path_destroy(mr_path_t* path) { delete path; }

double mr_path_end_time(const mr_path_t* path) { return path->impl.end_time(); }
double mr_path_end_value(const mr_path_t* path) { return path->impl.end_value(); }
double mr_path_horizon(const mr_path_t* path) { return path->impl.horizon(); }
size_t mr_path_sample_count(const mr_path_t* path) { return path->impl.size(); }

/* ---- functionals ---- */

mr_status mr_functional_heat_kernel(const char* tau, const char* horizon, mr_functional_t** out,
                                    char** errptr) {
  return guarded(errptr, [&] {
    store(out, martrep::heat_kernel(parse_rational(tau, "tau"),
                                    parse_rational(horizon, "horizon")));
  });
}

mr_status mr_functional_exp_integral(const char* horizon, mr_functional_t** out, char** errptr) {
  return guarded(errptr,
                 [&] { store(out, martrep::exp_integral(parse_rational(horizon, "horizon"))); });
}

mr_status mr_functional_wiener_power(unsigned n, const char* horizon, mr_functional_t** out,
                                     char** errptr) {
  return guarded(errptr, [&] {
    store(out, martrep::wiener_power(n, parse_rational(horizon, "horizon")));
  });
}

mr_status mr_functional_exp_wiener(const char* horizon, mr_functional_t** out, char** errptr) {
  return guarded(errptr,
                 [&] { store(out, martrep::exp_wiener(parse_rational(horizon, "horizon"))); });
}

mr_status mr_functional_constant(const char* value, const char* horizon, mr_functional_t** out,
                                 char** errptr) {
  return guarded(errptr, [&] {
    store(out, martrep::WienerFunctional::constant(parse_rational(value, "value"),
                                                   parse_rational(horizon, "horizon")));
  });
}

mr_status mr_functional_serialize(const mr_functional_t* f, char** out, char** errptr) {
  return guarded(errptr, [&] { store_string(out, deref(f, "functional").serialize()); });
}

mr_status mr_functional_parse(const char* text, mr_functional_t** out, char** errptr) {
  return guarded(errptr, [&] {
    martrep::require(text != nullptr, martrep::ErrorCode::Usage, "text must not be null");
    store(out, martrep::WienerFunctional::deserialize(text));
  });
}

mr_status mr_functional_horizon(const mr_functional_t* f, char** out, char** errptr) {
  return guarded(errptr, [&] {
    store_string(out, martrep::rational_to_string(deref(f, "functional").horizon()));
  });
}

void mr_functional_destroy(mr_functional_t* f) { delete f; }

size_t mr_functional_term_count(const mr_functional_t* f) { return f->impl.term_count(); }

mr_status mr_functional_sum(const mr_functional_t* a, const mr_functional_t* b,
                            mr_functional_t** out, char** errptr) {
  return guarded(errptr, [&] { store(out, deref(a, "lhs") + deref(b, "rhs")); });
}

mr_status mr_functional_product(const mr_functional_t* a, const mr_functional_t* b,
                                mr_functional_t** out, char** errptr) {
  return guarded(errptr, [&] { store(out, deref(a, "lhs") * deref(b, "rhs")); });
}

mr_status mr_functional_scale(const mr_functional_t* f, const char* factor,
                              mr_functional_t** out, char** errptr) {
  return guarded(errptr, [&] {
    store(out, deref(f, "functional").scaled(parse_rational(factor, "factor")));
  });
}

mr_status mr_functional_power(const mr_functional_t* f, unsigned n, mr_functional_t** out,
                              char** errptr) {
  return guarded(errptr, [&] { store(out, deref(f, "functional").power(n)); });
}

mr_status mr_functional_malliavin_at_time(const mr_functional_t* f, unsigned order,
                                          const char* time, mr_functional_t** out,
                                          char** errptr) {
  return guarded(errptr, [&] {
    store(out, deref(f, "functional").malliavin_at_time(order, parse_rational(time, "time")));
  });
}

mr_status mr_functional_freeze(const mr_functional_t* f, const mr_path_t* path, double* out,
                               char** errptr) {
  return guarded(errptr, [&] {
    store_double(out, deref(f, "functional").freeze_evaluate(deref(path, "path")));
  });
}

mr_status mr_functional_evaluate_full_path(const mr_functional_t* f, const mr_path_t* path,
                                           double* out, char** errptr) {
  return guarded(errptr, [&] {
    store_double(out, deref(f, "functional").evaluate_full_path(deref(path, "path")));
  });
}

/* ---- exact scalar arithmetic ---- */

mr_status mr_rational_fma(const char* a, int64_t multiplier, const char* b, char** out,
                          char** errptr) {
  return guarded(errptr, [&] {
    const martrep::Rational value =
        parse_rational(a, "a") + martrep::Rational(multiplier) * parse_rational(b, "b");
    store_string(out, martrep::rational_to_string(value));
  });
}

/* ---- expansion coefficients ---- */

mr_status mr_gamma_to_string(unsigned order, char** out, char** errptr) {
  return guarded(errptr,
                 [&] { store_string(out, martrep::gamma_coefficient(order).to_string()); });
}

mr_status mr_gamma_evaluate(unsigned order, double delta, double increment, double* out,
                            char** errptr) {
  return guarded(errptr,
                 [&] { store_double(out, martrep::gamma_evaluate(order, delta, increment)); });
}

mr_status mr_gamma_evaluate_exact(unsigned order, const char* delta, const char* increment,
                                  char** out, char** errptr) {
  return guarded(errptr, [&] {
    const martrep::Rational value = martrep::gamma_coefficient(order).evaluate(
        parse_rational(delta, "delta"), parse_rational(increment, "increment"));
    store_string(out, martrep::rational_to_string(value));
  });
}

/* ---- backward expansion ---- */

mr_status mr_bte_step(const mr_functional_t* f, const char* step_end, const char* delta,
                      const char* increment, unsigned order, uint64_t term_cap,
                      mr_functional_t** out, char** errptr) {
  return guarded(errptr, [&] {
    store(out, martrep::bte_step(deref(f, "functional"), parse_rational(step_end, "step_end"),
                                 parse_rational(delta, "delta"),
                                 parse_rational(increment, "increment"), order, term_cap));
  });
}

mr_status mr_bte_sweep(const mr_functional_t* f, const mr_path_t* prefix, unsigned steps,
                       const char* delta, unsigned order, const double* increments,
                       uint64_t term_cap, double* out, char** errptr) {
  return guarded(errptr, [&] {
    martrep::BteConfig cfg;
    cfg.step_count = steps;
    cfg.step_size = parse_rational(delta, "delta");
    cfg.truncation_order = order;
    cfg.term_cap = term_cap;
    if (increments != nullptr)
      cfg.increments = std::vector<double>(increments, increments + steps);
    store_double(out, martrep::backward_sweep(deref(f, "functional"), cfg,
                                              deref(prefix, "prefix")));
  });
}

mr_status mr_bte_truncation_bound(double bound_m, double delta, unsigned order, double* out,
                                  char** errptr) {
  return guarded(errptr,
                 [&] { store_double(out, martrep::truncation_bound(bound_m, delta, order)); });
}

/* ---- series evaluation ---- */

mr_status mr_dyson_term(const mr_functional_t* f, const mr_path_t* path, unsigned order,
                        uint64_t term_cap, double* out, char** errptr) {
  return guarded(errptr, [&] {
    store_double(out, martrep::dyson_term(deref(f, "functional"), deref(path, "path"), order,
                                          term_cap));
  });
}

mr_status mr_dyson_evaluate(const mr_functional_t* f, const mr_path_t* path, unsigned max_order,
                            double tolerance, uint64_t term_cap, mr_dyson_result_t** out,
                            char** errptr) {
  return guarded(errptr, [&] {
    martrep::require(out != nullptr, martrep::ErrorCode::Usage,
                     "output handle must not be null");
    std::optional<double> tol;
    if (tolerance >= 0.0) tol = tolerance;
    martrep::DysonReport report = martrep::dyson_evaluate(
        deref(f, "functional"), deref(path, "path"), max_order, tol, term_cap);
    *out = new mr_dyson_result_t{std::move(report)};
  });
}

void mr_dyson_result_destroy(mr_dyson_result_t* result) { delete result; }

size_t mr_dyson_result_row_count(const mr_dyson_result_t* result) {
  return result->impl.rows.size();
}

void mr_dyson_result_row(const mr_dyson_result_t* result, size_t index, unsigned* order,
                         double* term, double* partial_sum) {
  const martrep::DysonReport::Row& row = result->impl.rows.at(index);
  if (order != nullptr) *order = row.order;
  if (term != nullptr) *term = row.term;
  if (partial_sum != nullptr) *partial_sum = row.partial_sum;
}

double mr_dyson_result_value(const mr_dyson_result_t* result) { return result->impl.value(); }

int mr_dyson_result_tolerance_met(const mr_dyson_result_t* result) {
  return result->impl.tolerance_met ? 1 : 0;
}

mr_status mr_vertical_derivative_check(const mr_functional_t* f, const mr_path_t* path,
                                       unsigned order, double bump, unsigned max_order,
                                       uint64_t term_cap, double* finite_difference,
                                       double* series_derivative, char** errptr) {
  return guarded(errptr, [&] {
    const martrep::VerticalCheck check = martrep::vertical_derivative_check(
        deref(f, "functional"), deref(path, "path"), order, bump, max_order, term_cap);
    if (finite_difference != nullptr) *finite_difference = check.finite_difference;
    if (series_derivative != nullptr) *series_derivative = check.series_derivative;
  });
}

/* ---- oracles ---- */

mr_status mr_mc_conditional_expectation(const mr_functional_t* f, const mr_path_t* prefix,
                                        uint64_t sample_count, uint64_t seed,
                                        unsigned grid_steps, int antithetic, double* mean,
                                        double* std_error, uint64_t* samples_used,
                                        uint64_t* non_finite_count, char** errptr) {
  return guarded(errptr, [&] {
    martrep::McConfig cfg;
    cfg.sample_count = sample_count;
    cfg.seed = seed;
    cfg.grid_steps = grid_steps;
    cfg.antithetic = antithetic != 0;
    const martrep::McEstimate estimate =
        martrep::mc_conditional_expectation(deref(f, "functional"), deref(prefix, "prefix"), cfg);
    if (mean != nullptr) *mean = estimate.mean;
    if (std_error != nullptr) *std_error = estimate.std_error;
    if (samples_used != nullptr) *samples_used = estimate.samples_used;
    if (non_finite_count != nullptr) *non_finite_count = estimate.non_finite_count;
  });
}

mr_status mr_gaussian_moment_expectation(const mr_functional_t* f, const char* t, double w,
                                         double* out, char** errptr) {
  return guarded(errptr, [&] {
    store_double(out, martrep::gaussian_moment_expectation(deref(f, "functional"),
                                                           parse_rational(t, "t"), w));
  });
}

double mr_normal_draw(uint64_t seed, uint64_t sample, uint64_t index) {
  return martrep::rng::normal_draw(seed, sample, index);
}

}  // extern "C"
