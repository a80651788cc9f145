#pragma once

#include <cmath>
#include <cstddef>

namespace martrep {

// Neumaier compensated accumulator. Summation order still matters for the
// last bit, so callers must feed values in a fixed order for reproducibility.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double value) {
    double t = sum + value;
    if (std::abs(sum) >= std::abs(value)) {
      comp += (sum - t) + value;
    } else {
      comp += (value - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

inline double dot_compensated(const double* a, const double* b, size_t n) {
  CompensatedSum acc;
  for (size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

}  // namespace martrep
