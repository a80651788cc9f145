#include "bte.hpp"

#include <cmath>
#include <string>

#include "gamma.hpp"

namespace martrep {

WienerFunctional bte_step(const WienerFunctional& f, const Rational& step_end,
                          const Rational& delta, const Rational& increment, unsigned order,
                          uint64_t term_cap) {
  require(delta > 0, ErrorCode::Domain, "step size must be positive");
  require(step_end > 0 && step_end <= f.horizon(), ErrorCode::Domain,
          "step end outside (0, horizon]");
  WienerFunctional out = WienerFunctional::constant(0, f.horizon());
  for (unsigned l = 0; l <= order; ++l) {
    Rational weight = gamma_coefficient(l).evaluate(delta, increment);
    if (weight == 0) continue;
    out = out + f.malliavin_at_time(l, step_end).scaled(weight);
    require(out.term_count() <= term_cap, ErrorCode::Resource,
            "term cap exceeded in backward step at order " + std::to_string(l));
  }
  return out;
}

double backward_sweep(const WienerFunctional& f, const BteConfig& cfg, const PathPrefix& prefix) {
  require(!f.has_free_vars(), ErrorCode::Usage,
          "backward sweep requires a functional without free time variables");
  require(cfg.step_count >= 1, ErrorCode::Usage, "step count must be at least 1");
  require(cfg.step_size > 0, ErrorCode::Usage, "step size must be positive");
  if (cfg.increments) {
    require(cfg.increments->size() == cfg.step_count, ErrorCode::Usage,
            "increment list length must equal step count");
    for (double dw : *cfg.increments) {
      require(std::isfinite(dw), ErrorCode::Usage, "increments must be finite");
    }
  }

  const Rational start = f.horizon() - Rational(cfg.step_count) * cfg.step_size;
  require(start >= 0, ErrorCode::Domain, "M*delta exceeds the horizon");
  require(std::abs(prefix.end_time() - rational_to_double(start)) <= 1e-9, ErrorCode::Domain,
          "prefix must end at horizon - M*delta");

  WienerFunctional g = f;
  for (unsigned k = cfg.step_count; k >= 1; --k) {
    Rational step_end = start + Rational(k) * cfg.step_size;
    Rational dw = cfg.increments ? rational_from_double((*cfg.increments)[k - 1]) : Rational(0);
    try {
      g = bte_step(g, step_end, cfg.step_size, dw, cfg.truncation_order, cfg.term_cap);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Resource) {
        raise(ErrorCode::Resource,
              "term cap exceeded at backward step " + std::to_string(k) + ": " + e.what());
      }
      throw;
    }
  }

  if (!cfg.increments) return g.freeze_evaluate(prefix);

  // evaluate along the chosen path: prefix plus the cumulative increments
  std::vector<double> times;
  std::vector<double> values;
  double level = prefix.end_value();
  for (unsigned k = 1; k <= cfg.step_count; ++k) {
    level += (*cfg.increments)[k - 1];
    times.push_back(rational_to_double(start + Rational(k) * cfg.step_size));
    values.push_back(level);
  }
  return g.evaluate_full_path(prefix.extended(times, values));
}

double truncation_bound(double bound_m, double delta, unsigned order) {
  require(delta > 0 && delta < 1, ErrorCode::Domain, "bound requires 0 < delta < 1");
  require(bound_m >= 0, ErrorCode::Domain, "derivative bound must be nonnegative");
  double value = bound_m / (1.0 - delta);
  for (unsigned i = 1; i <= order + 1; ++i) value *= delta / static_cast<double>(i);
  return value;
}

}  // namespace martrep
