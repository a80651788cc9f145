/* C interface to the martrep library.
 *
 * Conventions:
 *   - Every fallible call returns a status code and, on failure, stores a
 *     malloc'd message in *errptr (when errptr is non-NULL). Free messages
 *     and returned strings with mr_free_string. Output parameters are left
 *     untouched on failure.
 *   - Objects are opaque handles created and destroyed by this API. Handles
 *     are immutable after creation and safe to share across threads.
 *   - Exact scalar parameters (times, step sizes, coefficients) are passed
 *     as rational strings: "3", "-1/8", or decimal text like "0.25", all
 *     parsed exactly.
 */

#ifndef MARTREP_MARTREP_H
#define MARTREP_MARTREP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  MR_OK = 0,
  MR_ERR_DOMAIN = 1,      /* argument outside the operation's mathematical domain */
  MR_ERR_USAGE = 2,       /* structurally invalid call */
  MR_ERR_UNSUPPORTED = 3, /* valid object outside what the operation implements */
  MR_ERR_RESOURCE = 4,    /* configured cap exceeded */
  MR_ERR_NUMERIC = 5,     /* non-finite value where finiteness is required */
  MR_ERR_PARSE = 6,       /* unreadable text input */
  MR_ERR_INTERNAL = 7     /* unexpected failure inside the library */
};
typedef int mr_status;

typedef struct mr_functional_t mr_functional_t;
typedef struct mr_path_t mr_path_t;
typedef struct mr_dyson_result_t mr_dyson_result_t;

/* Library version as "major.minor.patch". The pointer is static. */
const char* mr_version(void);

/* Frees any char* produced by this API (error messages included). */
void mr_free_string(char* text);

/* ---- Brownian path prefixes ---- */

/* Sampled path on a strictly increasing grid starting at 0 with value 0. */
mr_status mr_path_create(const double* times, const double* values, size_t count,
                         double horizon, mr_path_t** out, char** errptr);

/* Constant-zero path on a uniform grid over [0, t]. */
mr_status mr_path_zero(double end_time, size_t steps, double horizon, mr_path_t** out,
                       char** errptr);

/* New path extending `path` by additional samples after its end time. */
mr_status mr_path_extended(const mr_path_t* path, const double* times, const double* values,
                           size_t count, mr_path_t** out, char** errptr);

void mr_path_destroy(mr_path_t* path);

double mr_path_end_time(const mr_path_t* path);
double mr_path_end_value(const mr_path_t* path);
double mr_path_horizon(const mr_path_t* path);
size_t mr_path_sample_count(const mr_path_t* path);

/* ---- Functional construction ---- */

/* (tau - T)^{-1/2} exp(-W(T)^2 / (2 (tau - T))); tau - T must be a perfect
 * rational square. */
mr_status mr_functional_heat_kernel(const char* tau, const char* horizon,
                                    mr_functional_t** out, char** errptr);

/* exp(-integral_0^T W(u) du). */
mr_status mr_functional_exp_integral(const char* horizon, mr_functional_t** out, char** errptr);

/* W(T)^n. */
mr_status mr_functional_wiener_power(unsigned n, const char* horizon, mr_functional_t** out,
                                     char** errptr);

/* exp(W(T)). */
mr_status mr_functional_exp_wiener(const char* horizon, mr_functional_t** out, char** errptr);

mr_status mr_functional_constant(const char* value, const char* horizon, mr_functional_t** out,
                                 char** errptr);

/* Round-trippable canonical text form. */
mr_status mr_functional_serialize(const mr_functional_t* f, char** out, char** errptr);
mr_status mr_functional_parse(const char* text, mr_functional_t** out, char** errptr);

/* Horizon T as a canonical rational string. */
mr_status mr_functional_horizon(const mr_functional_t* f, char** out, char** errptr);

void mr_functional_destroy(mr_functional_t* f);

size_t mr_functional_term_count(const mr_functional_t* f);

mr_status mr_functional_sum(const mr_functional_t* a, const mr_functional_t* b,
                            mr_functional_t** out, char** errptr);
mr_status mr_functional_product(const mr_functional_t* a, const mr_functional_t* b,
                                mr_functional_t** out, char** errptr);
mr_status mr_functional_scale(const mr_functional_t* f, const char* factor,
                              mr_functional_t** out, char** errptr);
mr_status mr_functional_power(const mr_functional_t* f, unsigned n, mr_functional_t** out,
                              char** errptr);

/* order-fold endpoint derivative with every introduced variable fixed at
 * `time` (a rational string in (0, T]). */
mr_status mr_functional_malliavin_at_time(const mr_functional_t* f, unsigned order,
                                          const char* time, mr_functional_t** out,
                                          char** errptr);

/* Value along the frozen path (conditional-expectation input data). */
mr_status mr_functional_freeze(const mr_functional_t* f, const mr_path_t* path, double* out,
                               char** errptr);

/* Value on a path reaching the horizon. */
mr_status mr_functional_evaluate_full_path(const mr_functional_t* f, const mr_path_t* path,
                                           double* out, char** errptr);

/* ---- Exact scalar arithmetic ---- */

/* Canonical string of a + multiplier*b, computed exactly (e.g. deriving a
 * start time T - M*delta from rational config values). With multiplier 0 and
 * b "0" this normalizes `a`. */
mr_status mr_rational_fma(const char* a, int64_t multiplier, const char* b, char** out,
                          char** errptr);

/* ---- Backward-expansion coefficients ---- */

/* Human-readable polynomial in delta and x, e.g. "1/2*delta + 1/2*x^2". */
mr_status mr_gamma_to_string(unsigned order, char** out, char** errptr);

mr_status mr_gamma_evaluate(unsigned order, double delta, double increment, double* out,
                            char** errptr);

/* Exact evaluation; all three scalars are rational strings. */
mr_status mr_gamma_evaluate_exact(unsigned order, const char* delta, const char* increment,
                                  char** out, char** errptr);

/* ---- Backward Taylor expansion ---- */

mr_status mr_bte_step(const mr_functional_t* f, const char* step_end, const char* delta,
                      const char* increment, unsigned order, uint64_t term_cap,
                      mr_functional_t** out, char** errptr);

/* Full backward sweep over `steps` steps of exact size `delta` ending at the
 * horizon. `increments` may be NULL (frozen rule) or point at one value per
 * step. The prefix must end at horizon - steps*delta. */
mr_status mr_bte_sweep(const mr_functional_t* f, const mr_path_t* prefix, unsigned steps,
                       const char* delta, unsigned order, const double* increments,
                       uint64_t term_cap, double* out, char** errptr);

mr_status mr_bte_truncation_bound(double bound_m, double delta, unsigned order, double* out,
                                  char** errptr);

/* ---- Dyson series ---- */

mr_status mr_dyson_term(const mr_functional_t* f, const mr_path_t* path, unsigned order,
                        uint64_t term_cap, double* out, char** errptr);

/* Accumulates orders 0..max_order; pass tolerance < 0 to disable early
 * stopping. */
mr_status mr_dyson_evaluate(const mr_functional_t* f, const mr_path_t* path,
                            unsigned max_order, double tolerance, uint64_t term_cap,
                            mr_dyson_result_t** out, char** errptr);

void mr_dyson_result_destroy(mr_dyson_result_t* result);

size_t mr_dyson_result_row_count(const mr_dyson_result_t* result);
void mr_dyson_result_row(const mr_dyson_result_t* result, size_t index, unsigned* order,
                         double* term, double* partial_sum);
double mr_dyson_result_value(const mr_dyson_result_t* result);
int mr_dyson_result_tolerance_met(const mr_dyson_result_t* result);

/* Both sides of the vertical-derivative identity at the path end time;
 * order is 1 or 2. */
mr_status mr_vertical_derivative_check(const mr_functional_t* f, const mr_path_t* path,
                                       unsigned order, double bump, unsigned max_order,
                                       uint64_t term_cap, double* finite_difference,
                                       double* series_derivative, char** errptr);

/* ---- Oracles ---- */

mr_status mr_mc_conditional_expectation(const mr_functional_t* f, const mr_path_t* prefix,
                                        uint64_t sample_count, uint64_t seed,
                                        unsigned grid_steps, int antithetic, double* mean,
                                        double* std_error, uint64_t* samples_used,
                                        uint64_t* non_finite_count, char** errptr);

/* Exact conditional expectation for W(T)-measurable polynomial-exponential
 * functionals, given W(t) = w; `t` is a rational string. */
mr_status mr_gaussian_moment_expectation(const mr_functional_t* f, const char* t, double w,
                                         double* out, char** errptr);

/* Standard normal draw from the counter-based stream (always finite). */
double mr_normal_draw(uint64_t seed, uint64_t sample, uint64_t index);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MARTREP_MARTREP_H */
