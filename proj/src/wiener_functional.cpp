#include "wiener_functional.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "summation.hpp"

namespace martrep {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// QuadraticForm

QuadraticForm QuadraticForm::zero(size_t dim) {
  QuadraticForm q;
  q.dim = dim;
  q.matrix.assign(dim * dim, Rational(0));
  q.linear.assign(dim, Rational(0));
  q.constant = 0;
  return q;
}

void QuadraticForm::set(size_t i, size_t j, const Rational& value) {
  matrix[i * dim + j] = value;
  matrix[j * dim + i] = value;
}

bool QuadraticForm::is_zero() const {
  if (constant != 0) return false;
  for (const auto& v : linear) {
    if (v != 0) return false;
  }
  for (const auto& v : matrix) {
    if (v != 0) return false;
  }
  return true;
}

QuadraticForm QuadraticForm::operator+(const QuadraticForm& other) const {
  require(dim == other.dim, ErrorCode::Domain, "quadratic form dimension mismatch");
  QuadraticForm out = *this;
  for (size_t i = 0; i < matrix.size(); ++i) out.matrix[i] += other.matrix[i];
  for (size_t i = 0; i < linear.size(); ++i) out.linear[i] += other.linear[i];
  out.constant += other.constant;
  return out;
}

QuadraticForm QuadraticForm::remapped(size_t new_dim, const std::vector<size_t>& map) const {
  QuadraticForm out = zero(new_dim);
  out.constant = constant;
  for (size_t i = 0; i < dim; ++i) {
    if (map[i] == SIZE_MAX) continue;  // axis dropped; caller guarantees it is unused
    out.linear[map[i]] += linear[i];
    for (size_t j = 0; j < dim; ++j) {
      if (map[j] == SIZE_MAX) continue;
      out.matrix[map[i] * new_dim + map[j]] += at(i, j);
    }
  }
  return out;
}

double QuadraticForm::evaluate(const double* z) const {
  double out = rational_to_double(constant);
  for (size_t i = 0; i < dim; ++i) {
    double row = rational_to_double(linear[i]);
    for (size_t j = 0; j < dim; ++j) row += rational_to_double(at(i, j)) * z[j];
    out += row * z[i];
  }
  return out;
}

std::strong_ordering QuadraticForm::compare(const QuadraticForm& other) const {
  auto cmp = [](const Rational& a, const Rational& b) {
    if (a < b) return std::strong_ordering::less;
    if (b < a) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  };
  if (auto c = dim <=> other.dim; c != 0) return c;
  for (size_t i = 0; i < matrix.size(); ++i) {
    if (auto c = cmp(matrix[i], other.matrix[i]); c != 0) return c;
  }
  for (size_t i = 0; i < linear.size(); ++i) {
    if (auto c = cmp(linear[i], other.linear[i]); c != 0) return c;
  }
  return cmp(constant, other.constant);
}

// ---------------------------------------------------------------------------
// construction

WienerFunctional WienerFunctional::constant(const Rational& value, const Rational& horizon) {
  require(horizon > 0, ErrorCode::Domain, "horizon must be positive");
  WienerFunctional out;
  out.horizon_ = horizon;
  if (value != 0) {
    FunctionalTerm term;
    term.coeff = value;
    term.exp_arg = QuadraticForm::zero(0);
    out.terms_.push_back(std::move(term));
  }
  return out;
}

WienerFunctional WienerFunctional::gaussian_linear(PiecewisePolynomial kernel) {
  WienerFunctional out;
  out.horizon_ = kernel.horizon();
  require(out.horizon_ > 0, ErrorCode::Domain, "horizon must be positive");
  out.basis_.push_back(std::move(kernel));
  FunctionalTerm term;
  term.coeff = 1;
  term.exponents = {1};
  term.exp_arg = QuadraticForm::zero(1);
  out.terms_.push_back(std::move(term));
  out.canonicalize();
  return out;
}

WienerFunctional WienerFunctional::exp_quadratic(std::vector<PiecewisePolynomial> kernels,
                                                 QuadraticForm q) {
  require(q.dim == kernels.size(), ErrorCode::Usage,
          "quadratic form dimension must match kernel count");
  require(q.matrix.size() == q.dim * q.dim && q.linear.size() == q.dim, ErrorCode::Usage,
          "malformed quadratic form");
  for (size_t i = 0; i < q.dim; ++i) {
    for (size_t j = i + 1; j < q.dim; ++j) {
      require(q.at(i, j) == q.at(j, i), ErrorCode::Usage, "quadratic form must be symmetric");
    }
  }
  require(!kernels.empty(), ErrorCode::Usage,
          "exp_quadratic needs at least one kernel; use constant instead");
  WienerFunctional out;
  out.horizon_ = kernels.front().horizon();
  require(out.horizon_ > 0, ErrorCode::Domain, "horizon must be positive");
  for (const auto& k : kernels) {
    require(k.horizon() == out.horizon_, ErrorCode::Domain, "kernel horizon mismatch");
  }
  out.basis_ = std::move(kernels);
  FunctionalTerm term;
  term.coeff = 1;
  term.exponents.assign(out.basis_.size(), 0);
  term.exp_arg = std::move(q);
  out.terms_.push_back(std::move(term));
  out.canonicalize();
  return out;
}

// ---------------------------------------------------------------------------
// canonical form

std::strong_ordering WienerFunctional::term_compare(const FunctionalTerm& a,
                                                    const FunctionalTerm& b) {
  if (auto c = a.exponents.size() <=> b.exponents.size(); c != 0) return c;
  for (size_t i = 0; i < a.exponents.size(); ++i) {
    if (auto c = a.exponents[i] <=> b.exponents[i]; c != 0) return c;
  }
  if (auto c = a.exp_arg.compare(b.exp_arg); c != 0) return c;
  if (auto c = a.time_factors.size() <=> b.time_factors.size(); c != 0) return c;
  for (auto ia = a.time_factors.begin(), ib = b.time_factors.begin();
       ia != a.time_factors.end(); ++ia, ++ib) {
    if (auto c = ia->first <=> ib->first; c != 0) return c;
    if (auto c = ia->second.compare(ib->second); c != 0) return c;
  }
  if (a.coeff < b.coeff) return std::strong_ordering::less;
  if (b.coeff < a.coeff) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

void WienerFunctional::canonicalize() {
  // fold constant time factors into coefficients
  for (auto& term : terms_) {
    for (auto it = term.time_factors.begin(); it != term.time_factors.end();) {
      if (it->second.is_constant()) {
        term.coeff *= it->second.constant_value();
        it = term.time_factors.erase(it);
      } else {
        ++it;
      }
    }
  }
  std::erase_if(terms_, [](const FunctionalTerm& t) { return t.coeff == 0; });

  // sort + dedup the kernel basis; duplicate axes collapse additively
  if (!basis_.empty()) {
    std::vector<size_t> order(basis_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return basis_[a].compare(basis_[b]) == std::strong_ordering::less;
    });
    std::vector<PiecewisePolynomial> sorted;
    std::vector<size_t> map(basis_.size(), SIZE_MAX);
    for (size_t idx : order) {
      if (!sorted.empty() && sorted.back() == basis_[idx]) {
        map[idx] = sorted.size() - 1;
      } else {
        sorted.push_back(basis_[idx]);
        map[idx] = sorted.size() - 1;
      }
    }

    // drop axes no term uses
    std::vector<bool> used(sorted.size(), false);
    for (const auto& term : terms_) {
      for (size_t i = 0; i < basis_.size(); ++i) {
        bool touches = term.exponents[i] > 0 || term.exp_arg.linear[i] != 0;
        for (size_t j = 0; !touches && j < basis_.size(); ++j) {
          touches = term.exp_arg.at(i, j) != 0;
        }
        if (touches) used[map[i]] = true;
      }
    }
    std::vector<size_t> compact(sorted.size(), SIZE_MAX);
    std::vector<PiecewisePolynomial> final_basis;
    for (size_t i = 0; i < sorted.size(); ++i) {
      if (used[i]) {
        compact[i] = final_basis.size();
        final_basis.push_back(std::move(sorted[i]));
      }
    }
    std::vector<size_t> full_map(basis_.size());
    for (size_t i = 0; i < basis_.size(); ++i) full_map[i] = compact[map[i]];

    for (auto& term : terms_) {
      std::vector<uint32_t> expo(final_basis.size(), 0);
      for (size_t i = 0; i < basis_.size(); ++i) {
        if (full_map[i] != SIZE_MAX) expo[full_map[i]] += term.exponents[i];
      }
      term.exponents = std::move(expo);
      term.exp_arg = term.exp_arg.remapped(final_basis.size(), full_map);
    }
    basis_ = std::move(final_basis);
  }

  // merge structurally equal terms
  std::sort(terms_.begin(), terms_.end(), [](const FunctionalTerm& a, const FunctionalTerm& b) {
    return term_compare(a, b) == std::strong_ordering::less;
  });
  std::vector<FunctionalTerm> merged;
  for (auto& term : terms_) {
    if (!merged.empty()) {
      FunctionalTerm& last = merged.back();
      if (last.exponents == term.exponents && last.exp_arg == term.exp_arg &&
          last.time_factors == term.time_factors) {
        last.coeff += term.coeff;
        continue;
      }
    }
    merged.push_back(std::move(term));
  }
  std::erase_if(merged, [](const FunctionalTerm& t) { return t.coeff == 0; });
  terms_ = std::move(merged);

  if (terms_.empty() && !basis_.empty()) {
    basis_.clear();
  }
}

// ---------------------------------------------------------------------------
// algebra

namespace {

struct BasisMerge {
  std::vector<PiecewisePolynomial> basis;
  std::vector<size_t> left_map;
  std::vector<size_t> right_map;
};

// Both inputs are canonical (sorted, unique), so a single merge pass suffices.
BasisMerge merge_bases(const std::vector<PiecewisePolynomial>& a,
                       const std::vector<PiecewisePolynomial>& b) {
  BasisMerge out;
  out.left_map.resize(a.size());
  out.right_map.resize(b.size());
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() ||
        (i < a.size() && a[i].compare(b[j]) == std::strong_ordering::less)) {
      out.left_map[i++] = out.basis.size();
      out.basis.push_back(a[i - 1]);
    } else if (i == a.size() || b[j].compare(a[i]) == std::strong_ordering::less) {
      out.right_map[j++] = out.basis.size();
      out.basis.push_back(b[j - 1]);
    } else {
      out.left_map[i++] = out.basis.size();
      out.right_map[j++] = out.basis.size();
      out.basis.push_back(a[i - 1]);
    }
  }
  return out;
}

FunctionalTerm remap_term(const FunctionalTerm& term, size_t new_dim,
                          const std::vector<size_t>& index_map,
                          const std::vector<uint32_t>& var_map) {
  FunctionalTerm out;
  out.coeff = term.coeff;
  out.exponents.assign(new_dim, 0);
  for (size_t i = 0; i < term.exponents.size(); ++i) {
    out.exponents[index_map[i]] += term.exponents[i];
  }
  out.exp_arg = term.exp_arg.remapped(new_dim, index_map);
  for (const auto& [var, factor] : term.time_factors) {
    out.time_factors.emplace(var_map[var], factor);
  }
  return out;
}

// Union of free variable lists by name; left names keep their positions.
std::vector<std::string> merge_vars(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b,
                                    std::vector<uint32_t>& a_map,
                                    std::vector<uint32_t>& b_map) {
  std::vector<std::string> out = a;
  a_map.resize(a.size());
  for (uint32_t i = 0; i < a.size(); ++i) a_map[i] = i;
  b_map.resize(b.size());
  for (size_t j = 0; j < b.size(); ++j) {
    auto it = std::find(out.begin(), out.end(), b[j]);
    if (it == out.end()) {
      b_map[j] = static_cast<uint32_t>(out.size());
      out.push_back(b[j]);
    } else {
      b_map[j] = static_cast<uint32_t>(it - out.begin());
    }
  }
  return out;
}

}  // namespace

WienerFunctional WienerFunctional::operator+(const WienerFunctional& other) const {
  require(horizon_ == other.horizon_, ErrorCode::Domain, "horizon mismatch in functional sum");
  BasisMerge merge = merge_bases(basis_, other.basis_);
  std::vector<uint32_t> lvars, rvars;
  WienerFunctional out;
  out.horizon_ = horizon_;
  out.free_vars_ = merge_vars(free_vars_, other.free_vars_, lvars, rvars);
  out.basis_ = merge.basis;
  out.terms_.reserve(terms_.size() + other.terms_.size());
  for (const auto& t : terms_) {
    out.terms_.push_back(remap_term(t, merge.basis.size(), merge.left_map, lvars));
  }
  for (const auto& t : other.terms_) {
    out.terms_.push_back(remap_term(t, merge.basis.size(), merge.right_map, rvars));
  }
  out.canonicalize();
  return out;
}

WienerFunctional WienerFunctional::operator*(const WienerFunctional& other) const {
  require(horizon_ == other.horizon_, ErrorCode::Domain, "horizon mismatch in functional product");
  BasisMerge merge = merge_bases(basis_, other.basis_);
  std::vector<uint32_t> lvars, rvars;
  WienerFunctional out;
  out.horizon_ = horizon_;
  out.free_vars_ = merge_vars(free_vars_, other.free_vars_, lvars, rvars);
  out.basis_ = merge.basis;
  out.terms_.reserve(terms_.size() * other.terms_.size());
  for (const auto& ta : terms_) {
    FunctionalTerm left = remap_term(ta, merge.basis.size(), merge.left_map, lvars);
    for (const auto& tb : other.terms_) {
      FunctionalTerm right = remap_term(tb, merge.basis.size(), merge.right_map, rvars);
      FunctionalTerm prod;
      prod.coeff = left.coeff * right.coeff;
      prod.exponents = left.exponents;
      for (size_t i = 0; i < prod.exponents.size(); ++i) prod.exponents[i] += right.exponents[i];
      prod.exp_arg = left.exp_arg + right.exp_arg;
      prod.time_factors = left.time_factors;
      for (const auto& [var, factor] : right.time_factors) {
        auto [it, inserted] = prod.time_factors.emplace(var, factor);
        if (!inserted) it->second = it->second * factor;
      }
      out.terms_.push_back(std::move(prod));
    }
  }
  out.canonicalize();
  return out;
}

WienerFunctional WienerFunctional::scaled(const Rational& factor) const {
  WienerFunctional out = *this;
  for (auto& t : out.terms_) t.coeff *= factor;
  out.canonicalize();
  return out;
}

WienerFunctional WienerFunctional::power(unsigned n) const {
  WienerFunctional out = constant(1, horizon_);
  for (unsigned i = 0; i < n; ++i) out = out * *this;
  return out;
}

// ---------------------------------------------------------------------------
// differentiation

WienerFunctional WienerFunctional::with_var(const std::string& name, size_t& index_out) const {
  require(std::find(free_vars_.begin(), free_vars_.end(), name) == free_vars_.end(),
          ErrorCode::Usage, "time variable already free: " + name);
  WienerFunctional out = *this;
  index_out = out.free_vars_.size();
  out.free_vars_.push_back(name);
  return out;
}

WienerFunctional WienerFunctional::derivative_in_var(size_t var_index) const {
  require(var_index < free_vars_.size(), ErrorCode::Usage, "derivative variable out of range");
  WienerFunctional out;
  out.horizon_ = horizon_;
  out.basis_ = basis_;
  out.free_vars_ = free_vars_;
  const uint32_t v = static_cast<uint32_t>(var_index);

  for (const auto& term : terms_) {
    for (size_t i = 0; i < basis_.size(); ++i) {
      // coefficient/exponent pairs produced by d/dZ_i acting on the term
      auto emit = [&](const Rational& mult, size_t raised, bool lowered) {
        FunctionalTerm d = term;
        d.coeff *= mult;
        if (lowered) d.exponents[i] -= 1;
        if (raised != SIZE_MAX) d.exponents[raised] += 1;
        auto it = d.time_factors.find(v);
        if (it == d.time_factors.end()) {
          d.time_factors.emplace(v, basis_[i]);
        } else {
          it->second = it->second * basis_[i];
        }
        out.terms_.push_back(std::move(d));
      };

      if (term.exponents[i] > 0) emit(Rational(term.exponents[i]), SIZE_MAX, true);
      for (size_t j = 0; j < basis_.size(); ++j) {
        const Rational& a = term.exp_arg.at(i, j);
        if (a != 0) emit(2 * a, j, false);
      }
      if (term.exp_arg.linear[i] != 0) emit(term.exp_arg.linear[i], SIZE_MAX, false);
    }
  }
  out.canonicalize();
  return out;
}

WienerFunctional WienerFunctional::malliavin_derivative(const std::string& var) const {
  size_t index = 0;
  return with_var(var, index).derivative_in_var(index);
}

WienerFunctional WienerFunctional::substituted(size_t var_index, const Rational& time) const {
  require(var_index < free_vars_.size(), ErrorCode::Usage, "substitution variable out of range");
  require(time >= 0 && time <= horizon_, ErrorCode::Domain,
          "substitution time outside [0, horizon]");
  WienerFunctional out;
  out.horizon_ = horizon_;
  out.basis_ = basis_;
  out.free_vars_ = free_vars_;
  out.free_vars_.erase(out.free_vars_.begin() + static_cast<ptrdiff_t>(var_index));
  const uint32_t v = static_cast<uint32_t>(var_index);

  out.terms_.reserve(terms_.size());
  for (const auto& term : terms_) {
    FunctionalTerm s;
    s.coeff = term.coeff;
    s.exponents = term.exponents;
    s.exp_arg = term.exp_arg;
    for (const auto& [var, factor] : term.time_factors) {
      if (var == v) {
        s.coeff *= factor.evaluate(time);
      } else {
        s.time_factors.emplace(var > v ? var - 1 : var, factor);
      }
    }
    out.terms_.push_back(std::move(s));
  }
  out.canonicalize();
  return out;
}

WienerFunctional WienerFunctional::malliavin_at_time(unsigned order, const Rational& time) const {
  require(time > 0 && time <= horizon_, ErrorCode::Domain,
          "derivative time outside (0, horizon]");
  WienerFunctional out = *this;
  for (unsigned l = 0; l < order; ++l) {
    size_t index = 0;
    out = out.with_var("#d", index).derivative_in_var(index).substituted(index, time);
  }
  return out;
}

// ---------------------------------------------------------------------------
// evaluation

double WienerFunctional::freeze_evaluate(const PathPrefix& path,
                                         const std::map<std::string, double>& bindings,
                                         double endpoint_bump) const {
  require(rational_from_double(path.horizon()) == horizon_, ErrorCode::Domain,
          "path horizon differs from functional horizon");
  const double t = path.end_time();
  std::vector<Rational> binding_times;
  binding_times.reserve(free_vars_.size());
  for (const auto& name : free_vars_) {
    auto it = bindings.find(name);
    require(it != bindings.end(), ErrorCode::Usage, "missing binding for time variable " + name);
    require(it->second >= t && it->second <= path.horizon(), ErrorCode::Domain,
            "binding for " + name + " outside [end_time, horizon]");
    binding_times.push_back(rational_from_double(it->second));
  }

  std::vector<double> z(basis_.size(), 0.0);
  Rational end = rational_from_double(t);
  for (size_t i = 0; i < basis_.size(); ++i) {
    z[i] = stieltjes_along_prefix(basis_[i], path);
    if (endpoint_bump != 0.0) {
      z[i] += rational_to_double(basis_[i].evaluate(end)) * endpoint_bump;
    }
  }

  CompensatedSum acc;
  for (const auto& term : terms_) {
    double value = rational_to_double(term.coeff);
    for (size_t i = 0; i < basis_.size(); ++i) {
      for (uint32_t e = 0; e < term.exponents[i]; ++e) value *= z[i];
    }
    if (!term.exp_arg.is_zero()) {
      double q = term.exp_arg.evaluate(z.data());
      require(std::isfinite(q), ErrorCode::Numeric, "non-finite exponent argument");
      value *= std::exp(q);
    }
    for (const auto& [var, factor] : term.time_factors) {
      value *= rational_to_double(factor.evaluate(binding_times[var]));
    }
    require(std::isfinite(value), ErrorCode::Numeric, "term value overflowed in frozen evaluation");
    acc.add(value);
  }
  return acc.value();
}

double WienerFunctional::evaluate_full_path(const PathPrefix& path) const {
  require(!has_free_vars(), ErrorCode::Usage,
          "full-path evaluation requires a functional without free time variables");
  require(path.end_time() == rational_to_double(horizon_), ErrorCode::Usage,
          "path must reach the horizon");
  return freeze_evaluate(path);
}

// ---------------------------------------------------------------------------
// compiled evaluator

WienerFunctional::Compiled::Compiled(const WienerFunctional& f) {
  require(!f.has_free_vars(), ErrorCode::Usage,
          "compiled evaluation requires a functional without free time variables");
  dim_ = f.basis_size();
  entries_.reserve(f.term_count());
  for (const auto& term : f.terms()) {
    Entry e;
    e.coeff = rational_to_double(term.coeff);
    e.exponents = term.exponents;
    e.cst = 0.0;
    if (!term.exp_arg.is_zero()) {
      e.quad.resize(dim_ * dim_);
      e.lin.resize(dim_);
      for (size_t i = 0; i < dim_ * dim_; ++i) e.quad[i] = rational_to_double(term.exp_arg.matrix[i]);
      for (size_t i = 0; i < dim_; ++i) e.lin[i] = rational_to_double(term.exp_arg.linear[i]);
      e.cst = rational_to_double(term.exp_arg.constant);
    }
    entries_.push_back(std::move(e));
  }
}

double WienerFunctional::Compiled::operator()(const double* z) const {
  double out = 0.0;
  for (const auto& e : entries_) {
    double value = e.coeff;
    for (size_t i = 0; i < dim_; ++i) {
      for (uint32_t p = 0; p < e.exponents[i]; ++p) value *= z[i];
    }
    if (!e.quad.empty()) {
      double q = e.cst;
      for (size_t i = 0; i < dim_; ++i) {
        double row = e.lin[i];
        const double* mrow = e.quad.data() + i * dim_;
        for (size_t j = 0; j < dim_; ++j) row += mrow[j] * z[j];
        q += row * z[i];
      }
      value *= std::exp(q);
    }
    out += value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

ordered_json pp_to_json(const PiecewisePolynomial& pp) {
  ordered_json j;
  auto& bps = j["breakpoints"] = ordered_json::array();
  for (const auto& b : pp.breakpoints()) bps.push_back(rational_to_string(b));
  auto& segs = j["coefficients"] = ordered_json::array();
  for (const auto& seg : pp.coefficients()) {
    ordered_json s = ordered_json::array();
    for (const auto& c : seg) s.push_back(rational_to_string(c));
    segs.push_back(std::move(s));
  }
  return j;
}

PiecewisePolynomial pp_from_json(const ordered_json& j) {
  require(j.is_object() && j.contains("breakpoints") && j.contains("coefficients"),
          ErrorCode::Parse, "malformed kernel object");
  std::vector<Rational> bps;
  for (const auto& b : j.at("breakpoints")) {
    require(b.is_string(), ErrorCode::Parse, "breakpoint must be a rational string");
    bps.push_back(rational_from_string(b.get<std::string>()));
  }
  std::vector<std::vector<Rational>> coeffs;
  for (const auto& seg : j.at("coefficients")) {
    require(seg.is_array(), ErrorCode::Parse, "segment must be a coefficient array");
    std::vector<Rational> c;
    for (const auto& v : seg) {
      require(v.is_string(), ErrorCode::Parse, "coefficient must be a rational string");
      c.push_back(rational_from_string(v.get<std::string>()));
    }
    coeffs.push_back(std::move(c));
  }
  return PiecewisePolynomial::from_segments(std::move(bps), std::move(coeffs));
}

}  // namespace

std::string WienerFunctional::serialize() const {
  ordered_json j;
  j["horizon"] = rational_to_string(horizon_);
  auto& basis = j["basis"] = ordered_json::array();
  for (const auto& k : basis_) basis.push_back(pp_to_json(k));
  j["free_vars"] = free_vars_;
  auto& terms = j["terms"] = ordered_json::array();
  for (const auto& term : terms_) {
    ordered_json t;
    t["coeff"] = rational_to_string(term.coeff);
    t["exponents"] = term.exponents;
    ordered_json q;
    auto& rows = q["matrix"] = ordered_json::array();
    for (size_t i = 0; i < term.exp_arg.dim; ++i) {
      ordered_json row = ordered_json::array();
      for (size_t jx = 0; jx < term.exp_arg.dim; ++jx) {
        row.push_back(rational_to_string(term.exp_arg.at(i, jx)));
      }
      rows.push_back(std::move(row));
    }
    auto& lin = q["linear"] = ordered_json::array();
    for (const auto& b : term.exp_arg.linear) lin.push_back(rational_to_string(b));
    q["constant"] = rational_to_string(term.exp_arg.constant);
    t["exp_arg"] = std::move(q);
    ordered_json factors = ordered_json::object();
    for (const auto& [var, factor] : term.time_factors) {
      factors[std::to_string(var)] = pp_to_json(factor);
    }
    t["time_factors"] = std::move(factors);
    terms.push_back(std::move(t));
  }
  return j.dump();
}

WienerFunctional WienerFunctional::deserialize(const std::string& text) {
  try {
    return deserialize_checked(text);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(ErrorCode::Parse, std::string("malformed functional: ") + e.what());
  }
}

WienerFunctional WienerFunctional::deserialize_checked(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  require(!j.is_discarded(), ErrorCode::Parse, "invalid JSON");
  require(j.is_object() && j.contains("horizon") && j.contains("basis") &&
              j.contains("free_vars") && j.contains("terms"),
          ErrorCode::Parse, "missing functional fields");

  WienerFunctional out;
  require(j.at("horizon").is_string(), ErrorCode::Parse, "horizon must be a rational string");
  out.horizon_ = rational_from_string(j.at("horizon").get<std::string>());
  require(out.horizon_ > 0, ErrorCode::Parse, "horizon must be positive");

  for (const auto& k : j.at("basis")) {
    PiecewisePolynomial pp = pp_from_json(k);
    require(pp.horizon() == out.horizon_, ErrorCode::Parse, "kernel horizon mismatch");
    out.basis_.push_back(std::move(pp));
  }
  for (const auto& v : j.at("free_vars")) {
    require(v.is_string(), ErrorCode::Parse, "free variable names must be strings");
    out.free_vars_.push_back(v.get<std::string>());
  }

  const size_t dim = out.basis_.size();
  for (const auto& t : j.at("terms")) {
    require(t.is_object() && t.contains("coeff") && t.contains("exponents") &&
                t.contains("exp_arg") && t.contains("time_factors"),
            ErrorCode::Parse, "malformed term");
    FunctionalTerm term;
    term.coeff = rational_from_string(t.at("coeff").get<std::string>());
    for (const auto& e : t.at("exponents")) {
      require(e.is_number_unsigned(), ErrorCode::Parse, "exponents must be nonnegative integers");
      term.exponents.push_back(e.get<uint32_t>());
    }
    require(term.exponents.size() == dim, ErrorCode::Parse, "exponent count must match basis");

    const auto& q = t.at("exp_arg");
    term.exp_arg = QuadraticForm::zero(dim);
    const auto& rows = q.at("matrix");
    require(rows.size() == dim, ErrorCode::Parse, "exp_arg matrix must match basis size");
    for (size_t i = 0; i < dim; ++i) {
      require(rows[i].size() == dim, ErrorCode::Parse, "exp_arg matrix must be square");
      for (size_t jx = 0; jx < dim; ++jx) {
        term.exp_arg.matrix[i * dim + jx] = rational_from_string(rows[i][jx].get<std::string>());
      }
    }
    for (size_t i = 0; i < dim; ++i) {
      for (size_t jx = i + 1; jx < dim; ++jx) {
        require(term.exp_arg.at(i, jx) == term.exp_arg.at(jx, i), ErrorCode::Parse,
                "exp_arg matrix must be symmetric");
      }
    }
    const auto& lin = q.at("linear");
    require(lin.size() == dim, ErrorCode::Parse, "exp_arg linear size must match basis");
    for (size_t i = 0; i < dim; ++i) {
      term.exp_arg.linear[i] = rational_from_string(lin[i].get<std::string>());
    }
    term.exp_arg.constant = rational_from_string(q.at("constant").get<std::string>());

    for (const auto& [key, factor] : t.at("time_factors").items()) {
      size_t pos = 0;
      unsigned long var = std::stoul(key, &pos);
      require(pos == key.size() && var < out.free_vars_.size(), ErrorCode::Parse,
              "time factor variable out of range");
      PiecewisePolynomial pp = pp_from_json(factor);
      require(pp.horizon() == out.horizon_, ErrorCode::Parse, "time factor horizon mismatch");
      term.time_factors.emplace(static_cast<uint32_t>(var), std::move(pp));
    }
    out.terms_.push_back(std::move(term));
  }
  out.canonicalize();
  return out;
}

}  // namespace martrep
