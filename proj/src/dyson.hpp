#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wiener_functional.hpp"

namespace martrep {

/// Per-order record of a truncated series evaluation.
struct DysonReport {
  struct Row {
    unsigned order;
    double term;
    double partial_sum;
  };
  std::vector<Row> rows;       // orders 0..k_used, in order
  unsigned requested_order;    // K
  bool tolerance_met = false;  // true iff stopped early on the tolerance rule
  double tolerance_used = 0.0; // 0 when no tolerance was given

  double value() const { return rows.back().partial_sum; }
};

/// Order-k term of the time-ordered exponential series: applies the squared
/// endpoint derivative k times with nested time variables t <= s_1 <= ... <=
/// s_k <= T, freezes the Gaussian coordinates along the path, integrates each
/// term's per-variable time factors over the ordered simplex by exact
/// iterated univariate integration (innermost variable first), and scales by
/// (1/2)^k. `endpoint_bump` vertically shifts the frozen path endpoint.
/// pre: f has no free variables; path ends at or before the horizon.
/// Raises Resource when an intermediate exceeds term_cap terms.
double dyson_term(const WienerFunctional& f, const PathPrefix& path, unsigned order,
                  uint64_t term_cap = 1'000'000, double endpoint_bump = 0.0);

/// Accumulates dyson_term for k = 0..max_order. With a tolerance, stops early
/// once two consecutive terms are both below tol*max(1, |partial sum|) in
/// absolute value (series terms may alternate, so one small term is not
/// evidence of convergence).
DysonReport dyson_evaluate(const WienerFunctional& f, const PathPrefix& path, unsigned max_order,
                           std::optional<double> tolerance = std::nullopt,
                           uint64_t term_cap = 1'000'000, double endpoint_bump = 0.0);

/// Solution value of the path-dependent heat equation (drift 0, diffusion 1)
/// at (path, end_time): an alias for the truncated series value.
double ppde_evaluate(const WienerFunctional& f, const PathPrefix& path, unsigned max_order,
                     std::optional<double> tolerance = std::nullopt,
                     uint64_t term_cap = 1'000'000);

struct VerticalCheck {
  double finite_difference;  // order-l central stencil of the series value over endpoint bumps
  double series_derivative;  // series value of the l-th endpoint derivative at end_time
};

/// Compares the two sides of the vertical-derivative identity for the
/// conditional-expectation martingale. pre: order is 1 or 2; bump > 0;
/// path.end_time() > 0 (the derivative is taken at that time).
VerticalCheck vertical_derivative_check(const WienerFunctional& f, const PathPrefix& path,
                                        unsigned order, double bump, unsigned max_order,
                                        uint64_t term_cap = 1'000'000);

}  // namespace martrep
