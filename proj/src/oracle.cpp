#include "oracle.hpp"

#include <cmath>
#include <limits>

#include "rng.hpp"
#include "summation.hpp"

namespace martrep {

McEstimate mc_conditional_expectation(const WienerFunctional& f, const PathPrefix& prefix,
                                      const McConfig& cfg) {
  require(!f.has_free_vars(), ErrorCode::Usage,
          "Monte Carlo requires a functional without free time variables");
  require(cfg.sample_count >= 2, ErrorCode::Usage, "sample count must be at least 2");
  require(cfg.grid_steps >= 1, ErrorCode::Usage, "continuation grid needs at least one step");
  require(!cfg.antithetic || cfg.sample_count % 2 == 0, ErrorCode::Usage,
          "antithetic sampling needs an even sample count");
  require(rational_from_double(prefix.horizon()) == f.horizon(), ErrorCode::Domain,
          "path horizon differs from functional horizon");

  const double t = prefix.end_time();
  const double horizon = rational_to_double(f.horizon());

  if (t == horizon) {
    double value = f.evaluate_full_path(prefix);
    return {value, 0.0, cfg.sample_count, 0};
  }

  // continuation grid, end pinned to the horizon
  const unsigned m = cfg.grid_steps;
  std::vector<double> full_times = prefix.times();
  for (unsigned j = 1; j <= m; ++j) {
    double u = j == m ? horizon
                      : t + (horizon - t) * static_cast<double>(j) / static_cast<double>(m);
    full_times.push_back(u);
  }
  std::vector<double> sqrt_steps(m);
  for (unsigned j = 0; j < m; ++j) {
    double lo = full_times[prefix.size() + j - 1];
    double hi = full_times[prefix.size() + j];
    require(hi > lo, ErrorCode::Domain, "continuation grid collapsed; too many steps");
    sqrt_steps[j] = std::sqrt(hi - lo);
  }

  // z_i is affine in the continuation samples: a fixed prefix part plus
  // exact per-node weights
  const size_t dim = f.basis_size();
  std::vector<double> base(dim, 0.0);
  std::vector<std::vector<double>> node_weights(dim);
  for (size_t i = 0; i < dim; ++i) {
    std::vector<double> w = stieltjes_weights(f.basis()[i], full_times);
    base[i] = dot_compensated(w.data(), prefix.values().data(), prefix.size());
    node_weights[i].assign(w.begin() + static_cast<ptrdiff_t>(prefix.size()), w.end());
  }

  WienerFunctional::Compiled evaluate(f);
  const double w0 = prefix.end_value();

  std::vector<double> walk(m);
  std::vector<double> z(dim);
  auto sample_value = [&](uint64_t sample, double sign) {
    double level = w0;
    for (unsigned j = 0; j < m; ++j) {
      level += sign * rng::normal_draw(cfg.seed, sample, j) * sqrt_steps[j];
      walk[j] = level;
    }
    for (size_t i = 0; i < dim; ++i) {
      z[i] = base[i] + dot_compensated(node_weights[i].data(), walk.data(), m);
    }
    return evaluate(z.data());
  };

  CompensatedSum sum;
  CompensatedSum sum_sq;
  uint64_t used = 0;
  uint64_t non_finite = 0;

  if (cfg.antithetic) {
    const uint64_t pairs = cfg.sample_count / 2;
    for (uint64_t q = 0; q < pairs; ++q) {
      double a = sample_value(q, 1.0);
      double b = sample_value(q, -1.0);
      unsigned bad = (std::isfinite(a) ? 0u : 1u) + (std::isfinite(b) ? 0u : 1u);
      if (bad > 0) {
        non_finite += bad;
        continue;
      }
      double v = 0.5 * (a + b);
      sum.add(v);
      sum_sq.add(v * v);
      ++used;
    }
  } else {
    for (uint64_t s = 0; s < cfg.sample_count; ++s) {
      double v = sample_value(s, 1.0);
      if (!std::isfinite(v)) {
        ++non_finite;
        continue;
      }
      sum.add(v);
      sum_sq.add(v * v);
      ++used;
    }
  }

  McEstimate out;
  out.samples_used = used;
  out.non_finite_count = non_finite;
  if (used == 0) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.mean = sum.value() / static_cast<double>(used);
  if (used >= 2) {
    double variance =
        (sum_sq.value() - static_cast<double>(used) * out.mean * out.mean) /
        static_cast<double>(used - 1);
    out.std_error = std::sqrt(std::max(0.0, variance) / static_cast<double>(used));
  }
  return out;
}

double gaussian_moment_expectation(const WienerFunctional& f, const Rational& t, double w) {
  require(!f.has_free_vars(), ErrorCode::Unsupported,
          "moment oracle supports only functionals without free time variables");
  require(t >= 0 && t <= f.horizon(), ErrorCode::Domain, "time outside [0, horizon]");
  require(std::isfinite(w), ErrorCode::Domain, "conditioning value must be finite");
  require(f.basis_size() <= 1, ErrorCode::Unsupported,
          "moment oracle supports a single Gaussian coordinate");
  if (f.basis_size() == 1) {
    require(f.basis()[0] == PiecewisePolynomial::constant(1, f.horizon()),
            ErrorCode::Unsupported, "moment oracle requires the kernel identically 1");
  }

  const double s2 = rational_to_double(f.horizon() - t);  // variance of W(T) - W(t)

  CompensatedSum acc;
  for (const auto& term : f.terms()) {
    unsigned n = 0;
    double b = 0.0;
    double c = 0.0;
    if (f.basis_size() == 1) {
      n = term.exponents[0];
      require(n <= 12, ErrorCode::Unsupported, "moment oracle supports powers up to 12");
      require(term.exp_arg.at(0, 0) == 0, ErrorCode::Unsupported,
              "moment oracle supports linear exponents only");
      b = rational_to_double(term.exp_arg.linear[0]);
      c = rational_to_double(term.exp_arg.constant);
    } else {
      c = rational_to_double(term.exp_arg.constant);
    }

    // E[(w + X)^n e^{bX}] with X ~ N(0, s2), by exponential tilting:
    // e^{b^2 s2/2} * sum_j C(n,j) (w + b s2)^{n-j} mu_j, mu_j central moments
    double shifted = w + b * s2;
    double moment_sum = 0.0;
    double mu = 1.0;  // mu_0
    for (unsigned j = 0; j <= n; j += 2) {
      if (j > 0) mu *= s2 * static_cast<double>(j - 1);  // mu_j = s2^{j/2} (j-1)!!
      moment_sum += rational_to_double(binomial(n, j)) * std::pow(shifted, static_cast<double>(n - j)) * mu;
    }
    double value = rational_to_double(term.coeff) *
                   std::exp(c + b * w + 0.5 * b * b * s2) * moment_sum;
    acc.add(value);
  }
  return acc.value();
}

}  // namespace martrep
