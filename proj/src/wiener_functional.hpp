#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "path.hpp"
#include "piecewise_polynomial.hpp"

namespace martrep {

/// Exponent argument Q(z) = z^T A z + b.z + c with A symmetric, exact entries.
struct QuadraticForm {
  size_t dim = 0;
  std::vector<Rational> matrix;  // dim*dim row-major, kept symmetric
  std::vector<Rational> linear;  // dim
  Rational constant = 0;

  static QuadraticForm zero(size_t dim);

  const Rational& at(size_t i, size_t j) const { return matrix[i * dim + j]; }
  void set(size_t i, size_t j, const Rational& value);

  bool is_zero() const;
  QuadraticForm operator+(const QuadraticForm& other) const;

  /// Same form over a larger basis; `map[i]` is the new index of old axis i.
  QuadraticForm remapped(size_t new_dim, const std::vector<size_t>& map) const;

  double evaluate(const double* z) const;

  bool operator==(const QuadraticForm& other) const = default;
  std::strong_ordering compare(const QuadraticForm& other) const;
};

/// One additive term: coeff * prod_i Z_i^{e_i} * exp(Q(Z)) * prod_v p_v(s_v),
/// where Z_i = integral of basis kernel i against dW and p_v are univariate
/// time factors attached to free time variables by index. Constant time
/// factors are folded into coeff, so stored factors are never constant.
struct FunctionalTerm {
  Rational coeff;
  std::vector<uint32_t> exponents;  // per basis kernel
  QuadraticForm exp_arg;            // dim == basis size
  std::map<uint32_t, PiecewisePolynomial> time_factors;

  bool operator==(const FunctionalTerm& other) const = default;
};

/// Finite sum of FunctionalTerms over a shared kernel basis. The family is
/// closed under sum, product, scalar multiple, and the endpoint derivative
/// that sends Z_i to kernel_i(s) for a fresh time variable s, which is what
/// makes iterated differentiation of these functionals terminating and exact.
///
/// Canonical form maintained by every operation: basis kernels sorted and
/// deduplicated, unused kernels pruned, terms merged on equal structure,
/// zero-coefficient terms dropped, terms sorted. Equal functionals therefore
/// serialize identically.
class WienerFunctional {
 public:
  static WienerFunctional constant(const Rational& value, const Rational& horizon);

  /// Z = integral of kernel against dW over [0, horizon].
  static WienerFunctional gaussian_linear(PiecewisePolynomial kernel);

  /// exp(Q(Z_1..Z_n)) for Z_i built from `kernels` (Q.dim must match).
  static WienerFunctional exp_quadratic(std::vector<PiecewisePolynomial> kernels,
                                        QuadraticForm q);

  WienerFunctional operator+(const WienerFunctional& other) const;
  WienerFunctional operator*(const WienerFunctional& other) const;
  WienerFunctional scaled(const Rational& factor) const;
  WienerFunctional power(unsigned n) const;

  /// Endpoint (Malliavin) derivative with respect to a fresh time variable.
  /// pre: `var` is not already free in this functional (Usage error).
  WienerFunctional malliavin_derivative(const std::string& var) const;

  /// l-th derivative with all l fresh variables substituted at `time`.
  /// pre: 0 < time <= horizon.
  WienerFunctional malliavin_at_time(unsigned order, const Rational& time) const;

  /// Derivative in an existing free variable (used for iterated squares).
  WienerFunctional derivative_in_var(size_t var_index) const;

  /// Appends a fresh free variable; returns its index.
  WienerFunctional with_var(const std::string& name, size_t& index_out) const;

  /// Substitutes free variable var_index at a fixed time and removes it.
  WienerFunctional substituted(size_t var_index, const Rational& time) const;

  /// Value along the frozen path: every Z_i is read from the prefix (its
  /// pathwise integral against the piecewise-linear interpolant) and free
  /// variables take times from `bindings` (each must lie in [end_time,
  /// horizon]). `endpoint_bump` shifts the path value at end_time by h,
  /// i.e. Z_i += kernel_i(end_time) * h (a vertical perturbation).
  /// Raises Numeric when an exp argument is non-finite.
  double freeze_evaluate(const PathPrefix& path,
                         const std::map<std::string, double>& bindings = {},
                         double endpoint_bump = 0.0) const;

  /// freeze_evaluate on a path reaching the horizon; pre: no free variables,
  /// path.end_time() == horizon as float64.
  double evaluate_full_path(const PathPrefix& path) const;

  const Rational& horizon() const { return horizon_; }
  size_t term_count() const { return terms_.size(); }
  size_t basis_size() const { return basis_.size(); }
  const std::vector<PiecewisePolynomial>& basis() const { return basis_; }
  const std::vector<FunctionalTerm>& terms() const { return terms_; }
  const std::vector<std::string>& free_vars() const { return free_vars_; }
  bool has_free_vars() const { return !free_vars_.empty(); }
  bool is_zero() const { return terms_.empty(); }

  /// Canonical JSON text; bit-exact round trip through deserialize.
  std::string serialize() const;
  static WienerFunctional deserialize(const std::string& text);

  bool operator==(const WienerFunctional& other) const = default;

  /// Flattened float64 evaluator for the no-free-variable case; built once,
  /// then evaluated per sample from the z coordinates. Non-finite results
  /// are returned, not raised (callers count them).
  class Compiled {
   public:
    explicit Compiled(const WienerFunctional& f);
    double operator()(const double* z) const;
    size_t dim() const { return dim_; }

   private:
    struct Entry {
      double coeff;
      std::vector<uint32_t> exponents;
      std::vector<double> quad;  // empty when the exp argument is zero
      std::vector<double> lin;
      double cst;
    };
    std::vector<Entry> entries_;
    size_t dim_ = 0;
  };

 private:
  WienerFunctional() = default;
  void canonicalize();
  static WienerFunctional deserialize_checked(const std::string& text);
  static std::strong_ordering term_compare(const FunctionalTerm& a, const FunctionalTerm& b);

  Rational horizon_ = 0;
  std::vector<PiecewisePolynomial> basis_;
  std::vector<std::string> free_vars_;
  std::vector<FunctionalTerm> terms_;
};

}  // namespace martrep
