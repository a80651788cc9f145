#include <doctest.h>

#include <vector>

#include "summation.hpp"

using namespace martrep;

TEST_CASE("compensated sum survives classic cancellation") {
  CompensatedSum acc;
  acc.add(1.0);
  acc.add(1e100);
  acc.add(1.0);
  acc.add(-1e100);
  CHECK(acc.value() == 2.0);
}

TEST_CASE("compensated sum accumulates tiny terms against a large base") {
  CompensatedSum acc;
  acc.add(1.0);
  for (int i = 0; i < 10000000; ++i) acc.add(1e-16);
  CHECK(acc.value() == doctest::Approx(1.0 + 1e-9).epsilon(1e-12));
}

TEST_CASE("compensated dot product matches exact arithmetic") {
  std::vector<double> a{1e16, 1.0, -1e16, 2.0};
  std::vector<double> b{1.0, 3.0, 1.0, 0.5};
  CHECK(dot_compensated(a.data(), b.data(), a.size()) == 4.0);
}
