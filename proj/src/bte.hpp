#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wiener_functional.hpp"

namespace martrep {

/// Discrete backward scheme configuration. The sweep covers [T - M*delta, T]
/// in M steps; step arithmetic is exact rational throughout.
struct BteConfig {
  unsigned step_count = 1;          // M
  Rational step_size = 0;           // delta
  unsigned truncation_order = 0;    // L, per step
  /// One increment per step, indexed forward in time (increments[k-1] is the
  /// step onto time t + k*delta). Absent = frozen rule, every increment 0.
  std::optional<std::vector<double>> increments;
  uint64_t term_cap = 1'000'000;
};

/// One backward step at `step_end`:
///   sum_{l=0}^{order} G_l(delta, increment) * malliavin_at_time(f, l, step_end)
/// with the coefficient polynomials folded into term coefficients exactly
/// (the float increment converts losslessly to a rational).
/// pre: 0 < step_end <= horizon; delta > 0.
/// Raises Resource when the result exceeds term_cap terms.
WienerFunctional bte_step(const WienerFunctional& f, const Rational& step_end,
                          const Rational& delta, const Rational& increment, unsigned order,
                          uint64_t term_cap = 1'000'000);

/// Full backward sweep: composes bte_step for k = M down to 1, then evaluates
/// the composed functional along the prefix extended by the chosen increments
/// (frozen rule: the constant extension, which reduces exactly to the prefix
/// value). The prefix must end at T - M*delta within 1e-9.
/// pre: f has no free variables.
double backward_sweep(const WienerFunctional& f, const BteConfig& cfg, const PathPrefix& prefix);

/// A priori mean-square truncation bound delta^{L+1}/(L+1)! * bound_m/(1-delta).
/// pre: 0 < delta < 1 (Domain error otherwise); bound_m >= 0.
double truncation_bound(double bound_m, double delta, unsigned order);

}  // namespace martrep
