#include "path.hpp"

#include <cmath>

#include "summation.hpp"

namespace martrep {

PathPrefix PathPrefix::create(std::vector<double> times, std::vector<double> values,
                              double horizon) {
  require(!times.empty(), ErrorCode::Domain, "path needs at least one sample");
  require(times.size() == values.size(), ErrorCode::Domain,
          "path times and values must have equal length");
  require(times.front() == 0.0, ErrorCode::Domain, "path must start at time 0");
  require(values.front() == 0.0, ErrorCode::Domain, "path must start at value 0");
  for (size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]) && std::isfinite(values[i]), ErrorCode::Domain,
            "path samples must be finite");
    if (i > 0) {
      require(times[i - 1] < times[i], ErrorCode::Domain, "path times must be strictly increasing");
    }
  }
  require(std::isfinite(horizon) && horizon >= times.back(), ErrorCode::Domain,
          "horizon must be finite and not precede the last sample");
  PathPrefix out;
  out.times_ = std::move(times);
  out.values_ = std::move(values);
  out.horizon_ = horizon;
  return out;
}

PathPrefix PathPrefix::zero(double t, size_t steps, double horizon) {
  require(t >= 0.0, ErrorCode::Domain, "prefix end time must be nonnegative");
  std::vector<double> times{0.0};
  if (t > 0.0) {
    require(steps >= 1, ErrorCode::Domain, "nonzero prefix needs at least one step");
    for (size_t i = 1; i <= steps; ++i) {
      times.push_back(i == steps ? t : t * static_cast<double>(i) / static_cast<double>(steps));
    }
  }
  std::vector<double> values(times.size(), 0.0);
  return create(std::move(times), std::move(values), horizon);
}

PathPrefix PathPrefix::extended(const std::vector<double>& times,
                                const std::vector<double>& values) const {
  require(times.size() == values.size(), ErrorCode::Domain,
          "extension times and values must have equal length");
  std::vector<double> t = times_;
  std::vector<double> v = values_;
  for (size_t i = 0; i < times.size(); ++i) {
    require(times[i] > t.back(), ErrorCode::Domain, "extension must stay strictly after the prefix");
    t.push_back(times[i]);
    v.push_back(values[i]);
  }
  return create(std::move(t), std::move(v), horizon_);
}

std::vector<double> stieltjes_weights(const PiecewisePolynomial& kernel,
                                      const std::vector<double>& times) {
  require(!times.empty() && times.front() == 0.0, ErrorCode::Domain,
          "weight grid must start at 0");
  Rational end = rational_from_double(times.back());
  require(end <= kernel.horizon(), ErrorCode::Domain, "grid extends past the kernel horizon");

  std::vector<double> weights(times.size(), 0.0);
  PiecewisePolynomial deriv = kernel.derivative();
  // u * kernel'(u), used to split each interval integral into the two
  // endpoint weights of the linear interpolant
  PiecewisePolynomial moment =
      deriv * PiecewisePolynomial::linear(Rational(0), Rational(1), kernel.horizon());

  Rational prev = 0;
  for (size_t i = 0; i + 1 < times.size(); ++i) {
    Rational a = prev;
    Rational b = rational_from_double(times[i + 1]);
    require(a < b, ErrorCode::Domain, "weight grid must be strictly increasing");
    Rational i1 = deriv.integrate(a, b);
    Rational ip = moment.integrate(a, b);
    Rational h = b - a;
    Rational alpha = (b * i1 - ip) / h;  // weight on W(a)
    Rational beta = (ip - a * i1) / h;   // weight on W(b)
    weights[i] -= rational_to_double(alpha);
    weights[i + 1] -= rational_to_double(beta);
    prev = b;
  }
  weights.back() += rational_to_double(kernel.evaluate(end));
  return weights;
}

double stieltjes_along_prefix(const PiecewisePolynomial& kernel, const PathPrefix& path) {
  if (path.size() == 1) return 0.0;
  std::vector<double> w = stieltjes_weights(kernel, path.times());
  return dot_compensated(w.data(), path.values().data(), w.size());
}

}  // namespace martrep
