#include "dyson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "summation.hpp"

namespace martrep {

namespace {

// Frozen Gaussian coordinates along the path, with an optional vertical bump
// of the endpoint value: z_i = integral f_i dW + f_i(t)*h.
std::vector<double> frozen_coordinates(const WienerFunctional& f, const PathPrefix& path,
                                       double endpoint_bump) {
  std::vector<double> z(f.basis_size(), 0.0);
  Rational end = rational_from_double(path.end_time());
  for (size_t i = 0; i < f.basis_size(); ++i) {
    z[i] = stieltjes_along_prefix(f.basis()[i], path);
    if (endpoint_bump != 0.0) {
      z[i] += rational_to_double(f.basis()[i].evaluate(end)) * endpoint_bump;
    }
  }
  return z;
}

// Ordered-simplex integral of the term's per-variable factors over
// {t <= s_1 <= ... <= s_k <= T}, iterated innermost (s_k) first. Variables
// carry indices 0..k-1; a missing factor means the constant 1 (its kernel
// was constant and folded into the coefficient).
Rational simplex_integral(const FunctionalTerm& term, unsigned order, const Rational& t,
                          const Rational& horizon) {
  PiecewisePolynomial g = PiecewisePolynomial::constant(1, horizon);
  for (unsigned j = order; j >= 1; --j) {
    auto it = term.time_factors.find(j - 1);
    if (it != term.time_factors.end()) g = it->second * g;
    g = g.integral_to_horizon();
  }
  return g.evaluate(t);
}

void validate_dyson_inputs(const WienerFunctional& f, const PathPrefix& path) {
  require(!f.has_free_vars(), ErrorCode::Usage,
          "series evaluation requires a functional without free time variables");
  require(rational_from_double(path.horizon()) == f.horizon(), ErrorCode::Domain,
          "path horizon differs from functional horizon");
}

// Shared engine: G starts as f and gains one squared derivative per order so
// consecutive orders reuse the previous functional. Differentiation never
// introduces basis kernels but may prune ones that drop out, so the frozen
// coordinates are remapped against the original basis at every order.
class SeriesAccumulator {
 public:
  SeriesAccumulator(const WienerFunctional& f, const PathPrefix& path, uint64_t term_cap,
                    double endpoint_bump)
      : g_(f),
        basis0_(f.basis()),
        z0_(frozen_coordinates(f, path, endpoint_bump)),
        t_exact_(rational_from_double(path.end_time())),
        horizon_(f.horizon()),
        term_cap_(term_cap) {
    remap_coordinates();
  }

  // Value of the order-k series term; must be called with k = 0, 1, 2, ...
  double next_term(unsigned k) {
    if (k > 0) {
      size_t var = 0;
      g_ = g_.with_var("#s" + std::to_string(k), var);
      g_ = g_.derivative_in_var(var);
      g_ = g_.derivative_in_var(var);
      require(g_.term_count() <= term_cap_, ErrorCode::Resource,
              "term cap exceeded in series order " + std::to_string(k));
      remap_coordinates();
    }
    CompensatedSum acc;
    const Rational half_power = Rational(1) / rational_pow(Rational(2), k);
    for (const auto& term : g_.terms()) {
      Rational weight = term.coeff * half_power * simplex_integral(term, k, t_exact_, horizon_);
      if (weight == 0) continue;
      double value = rational_to_double(weight);
      for (size_t i = 0; i < z_.size(); ++i) {
        for (uint32_t e = 0; e < term.exponents[i]; ++e) value *= z_[i];
      }
      if (!term.exp_arg.is_zero()) {
        double q = term.exp_arg.evaluate(z_.data());
        require(std::isfinite(q), ErrorCode::Numeric, "non-finite exponent argument");
        value *= std::exp(q);
      }
      acc.add(value);
    }
    return acc.value();
  }

 private:
  void remap_coordinates() {
    z_.assign(g_.basis_size(), 0.0);
    for (size_t i = 0; i < g_.basis_size(); ++i) {
      auto it = std::lower_bound(
          basis0_.begin(), basis0_.end(), g_.basis()[i],
          [](const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
            return a.compare(b) == std::strong_ordering::less;
          });
      require(it != basis0_.end() && *it == g_.basis()[i], ErrorCode::Numeric,
              "derivative introduced an unknown kernel");
      z_[i] = z0_[static_cast<size_t>(it - basis0_.begin())];
    }
  }

  WienerFunctional g_;
  std::vector<PiecewisePolynomial> basis0_;
  std::vector<double> z0_;
  std::vector<double> z_;
  Rational t_exact_;
  Rational horizon_;
  uint64_t term_cap_;
};

}  // namespace

double dyson_term(const WienerFunctional& f, const PathPrefix& path, unsigned order,
                  uint64_t term_cap, double endpoint_bump) {
  validate_dyson_inputs(f, path);
  SeriesAccumulator acc(f, path, term_cap, endpoint_bump);
  double term = 0.0;
  for (unsigned k = 0; k <= order; ++k) term = acc.next_term(k);
  return term;
}

DysonReport dyson_evaluate(const WienerFunctional& f, const PathPrefix& path, unsigned max_order,
                           std::optional<double> tolerance, uint64_t term_cap,
                           double endpoint_bump) {
  validate_dyson_inputs(f, path);
  if (tolerance) {
    require(*tolerance > 0, ErrorCode::Usage, "tolerance must be positive");
  }

  DysonReport report;
  report.requested_order = max_order;
  report.tolerance_used = tolerance.value_or(0.0);

  SeriesAccumulator acc(f, path, term_cap, endpoint_bump);
  CompensatedSum partial;
  double prev_term = 0.0;
  for (unsigned k = 0; k <= max_order; ++k) {
    double term = acc.next_term(k);
    partial.add(term);
    report.rows.push_back({k, term, partial.value()});
    if (tolerance && k >= 1) {
      double threshold = *tolerance * std::max(1.0, std::abs(partial.value()));
      if (std::abs(term) < threshold && std::abs(prev_term) < threshold) {
        report.tolerance_met = true;
        break;
      }
    }
    prev_term = term;
  }
  return report;
}

double ppde_evaluate(const WienerFunctional& f, const PathPrefix& path, unsigned max_order,
                     std::optional<double> tolerance, uint64_t term_cap) {
  return dyson_evaluate(f, path, max_order, tolerance, term_cap).value();
}

VerticalCheck vertical_derivative_check(const WienerFunctional& f, const PathPrefix& path,
                                        unsigned order, double bump, unsigned max_order,
                                        uint64_t term_cap) {
  require(order == 1 || order == 2, ErrorCode::Usage, "vertical check supports orders 1 and 2");
  require(bump > 0 && std::isfinite(bump), ErrorCode::Usage, "bump size must be positive");

  auto value_at = [&](double shift) {
    return dyson_evaluate(f, path, max_order, std::nullopt, term_cap, shift).value();
  };

  VerticalCheck out{};
  if (order == 1) {
    out.finite_difference = (value_at(bump) - value_at(-bump)) / (2.0 * bump);
  } else {
    out.finite_difference =
        (value_at(bump) - 2.0 * value_at(0.0) + value_at(-bump)) / (bump * bump);
  }

  Rational t_exact = rational_from_double(path.end_time());
  WienerFunctional derived = f.malliavin_at_time(order, t_exact);
  out.series_derivative = dyson_evaluate(derived, path, max_order, std::nullopt, term_cap).value();
  return out;
}

}  // namespace martrep
