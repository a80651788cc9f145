#pragma once

#include <vector>

#include "piecewise_polynomial.hpp"

namespace martrep {

/// Observed Brownian path on [0, t], stored as samples at a strictly
/// increasing grid starting at 0 with W(0) = 0, plus the horizon T >= t of
/// the ambient time interval. Between samples the path is read as its
/// piecewise-linear interpolant, which makes kernel integrals against the
/// path exact (see stieltjes_along_prefix).
class PathPrefix {
 public:
  /// pre: times strictly increasing from 0, values same length with
  /// values[0] == 0, all entries finite, horizon >= times.back().
  static PathPrefix create(std::vector<double> times, std::vector<double> values,
                           double horizon);

  /// Constant-zero path observed on an n-step uniform grid over [0, t].
  static PathPrefix zero(double t, size_t steps, double horizon);

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  double horizon() const { return horizon_; }
  double end_time() const { return times_.back(); }
  double end_value() const { return values_.back(); }
  size_t size() const { return times_.size(); }

  /// New prefix with extra samples appended after end_time().
  PathPrefix extended(const std::vector<double>& times,
                      const std::vector<double>& values) const;

 private:
  PathPrefix() = default;
  std::vector<double> times_;
  std::vector<double> values_;
  double horizon_ = 0.0;
};

/// Exact linear weights for the pathwise stochastic integral of `kernel`
/// against a path sampled on `times`: with W piecewise linear on the grid,
///   integral_0^t kernel dW  ==  sum_i weights[i] * W(times[i]).
/// Derived by integration by parts, kernel(t)W(t) - integral kernel' W du,
/// with each interval's du-integral exact in rational arithmetic.
/// pre: times strictly increasing from 0, times.back() <= kernel horizon.
std::vector<double> stieltjes_weights(const PiecewisePolynomial& kernel,
                                      const std::vector<double>& times);

/// integral_0^{end_time} kernel dW along the prefix, exact on the
/// piecewise-linear interpolant. Refining the grid by interpolation points
/// leaves the value unchanged up to float rounding of the weight dot product.
double stieltjes_along_prefix(const PiecewisePolynomial& kernel, const PathPrefix& path);

}  // namespace martrep
