#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harmonica/taylor.hpp"

namespace harmonica {

enum class ActivationKind { exp, square, polynomial, erf_sigmoid, smooth_hinge, custom };

std::string_view to_string(ActivationKind kind) noexcept;
/// Accepts the config names "exp", "square", "poly", "erf_sigmoid",
/// "smooth_hinge" and "custom".
ActivationKind parse_activation_kind(std::string_view name);

/// An activation sigma together with enough information to expand it at 0.
///
/// `polynomial` holds the Taylor coefficients of sigma itself (signs allowed).
/// `custom` holds a user-supplied power series: either an explicit coefficient
/// list or, when `geometric_ratio` is set, the infinite series ratio^t.
struct ActivationSpec {
  ActivationKind kind = ActivationKind::exp;
  std::vector<double> coefficients;
  std::optional<double> geometric_ratio;

  static ActivationSpec exp() { return {ActivationKind::exp, {}, {}}; }
  static ActivationSpec square() { return {ActivationKind::square, {}, {}}; }
  static ActivationSpec identity() { return {ActivationKind::polynomial, {0.0, 1.0}, {}}; }
  static ActivationSpec polynomial(std::vector<double> c) {
    return {ActivationKind::polynomial, std::move(c), {}};
  }
  static ActivationSpec erf_sigmoid() { return {ActivationKind::erf_sigmoid, {}, {}}; }
  static ActivationSpec smooth_hinge() { return {ActivationKind::smooth_hinge, {}, {}}; }
  static ActivationSpec custom(std::vector<double> c) {
    return {ActivationKind::custom, std::move(c), {}};
  }
  static ActivationSpec geometric(double ratio) {
    return {ActivationKind::custom, {}, ratio};
  }

  /// Throws ErrorKind::validation for non-finite coefficients, an empty
  /// polynomial list, or a geometric ratio outside (0, 1).
  void validate() const;

  /// Degree of sigma when it is a polynomial, nullopt otherwise.
  std::optional<int> polynomial_degree() const;

  /// True when every Taylor coefficient of sigma at 0 is nonzero, the
  /// condition under which the multi-layer kernel is c-universal. Checked up
  /// to `order` for infinite series.
  bool all_derivatives_nonzero(int order = 64) const;

  /// sigma(x).
  double operator()(double x) const;

  bool operator==(const ActivationSpec&) const = default;
};

/// Series with coefficients |sigma^{(t)}(0)| / t!, truncated at `order`.
CoeffSeries majorant_series(const ActivationSpec& spec, int order);

/// f(t) = sum_t |sigma^{(t)}(0)| / t! * t^m as a scalar, in closed form where
/// one exists (exp, square, geometric) and by a long series otherwise.
double majorant_value(const ActivationSpec& spec, double t);

}  // namespace harmonica
