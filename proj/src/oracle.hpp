#pragma once

#include <cstdint>

#include "wiener_functional.hpp"

namespace martrep {

struct McConfig {
  uint64_t sample_count = 0;  // total paths (antithetic: must be even)
  uint64_t seed = 0;
  unsigned grid_steps = 64;   // continuation steps from end_time to horizon
  bool antithetic = false;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  uint64_t samples_used = 0;      // averaging units in the mean (pairs when antithetic)
  uint64_t non_finite_count = 0;  // flagged evaluations, excluded, never silent
};

/// Seeded Monte Carlo estimate of the conditional expectation at the prefix
/// end: simulates Brownian continuations to the horizon on a uniform grid
/// (normal increments from the counter-based stream keyed by (seed, sample,
/// step)), evaluates the functional on prefix + continuation, and averages.
/// Antithetic mode pairs sample 2i with the negated increments of 2i and
/// counts each pair once toward the variance. The estimate depends only on
/// (seed, sample_count, grid_steps, antithetic), not on scheduling.
/// pre: f has no free variables; cfg.sample_count >= 2; grid_steps >= 1.
McEstimate mc_conditional_expectation(const WienerFunctional& f, const PathPrefix& prefix,
                                      const McConfig& cfg);

/// Exact conditional expectation for the restricted family
///   sum of terms  c * W(T)^n * exp(b*W(T) + const),  n <= 12
/// (single basis kernel identically 1), given W(t) = w: Gaussian moment and
/// moment-generating-function identities with mean w and variance T - t.
/// Raises Unsupported outside the family.
double gaussian_moment_expectation(const WienerFunctional& f, const Rational& t, double w);

}  // namespace martrep
