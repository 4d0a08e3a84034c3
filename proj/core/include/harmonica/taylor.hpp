#pragma once

#include <concepts>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace harmonica {

// Truncation knobs shared by the series engine. The defaults are the ones the
// kernel construction uses; callers needing deeper expansions (eigenvalue
// tables) raise `order` explicitly and stay under `order_cap`.
struct SeriesLimits {
  int default_order = 64;
  int order_cap = 8192;
  int compose_terms = 64;
  double compose_tail_tol = 1e-10;
};

/// Dense truncated power series: coeffs[m] is the coefficient of x^m for
/// 0 <= m <= order(). Entries are finite; nonneg() records whether every
/// coefficient is >= 0.
class CoeffSeries {
 public:
  CoeffSeries();
  explicit CoeffSeries(std::vector<double> coeffs);
  CoeffSeries(std::initializer_list<double> coeffs);

  static CoeffSeries constant(double value, int order);
  static CoeffSeries monomial(int degree, int order);
  /// Coefficients rate^m / m! of exp(rate * x).
  static CoeffSeries exponential(int order, double rate = 1.0);
  /// Coefficients ratio^m of 1 / (1 - ratio * x).
  static CoeffSeries geometric(double ratio, int order);

  int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool nonneg() const noexcept { return nonneg_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }

  /// Coefficient of x^m; zero past the truncation order.
  double operator[](int m) const noexcept {
    return (m >= 0 && m <= order()) ? coeffs_[static_cast<std::size_t>(m)] : 0.0;
  }

  /// Index of the last nonzero coefficient, nullopt for the zero series.
  std::optional<int> degree() const noexcept;

  /// Same series cut or zero-padded to `order`.
  CoeffSeries truncated(int order) const;

  bool operator==(const CoeffSeries& other) const = default;

 private:
  std::vector<double> coeffs_;
  bool nonneg_ = true;
};

/// c[m] = sum_{k<=m} a[k] b[m-k] for m <= order.
CoeffSeries cauchy_product(const CoeffSeries& a, const CoeffSeries& b, int order,
                           const SeriesLimits& limits = {});

/// a(x)^alpha truncated at `order`; alpha = 0 gives the constant 1.
CoeffSeries power(const CoeffSeries& a, int alpha, int order,
                  const SeriesLimits& limits = {});

/// All powers a^0 .. a^max_alpha at a common order, built by successive
/// products (cheaper than calling power() per exponent).
std::vector<CoeffSeries> powers(const CoeffSeries& a, int max_alpha, int order,
                                const SeriesLimits& limits = {});

struct Composition {
  CoeffSeries series;
  // Largest relative size, over the returned coefficients, of the estimated
  // contribution from outer terms beyond the last one summed. Zero when the
  // outer series is a polynomial of degree <= the term budget.
  double tail_estimate = 0.0;
  int terms_used = 0;
};

using PowerTable = std::function<CoeffSeries(int alpha)>;

/// Coefficients of outer(inner(x)) via
///   [x^m] = sum_{l=0}^{L} outer[l] * [x^m] inner^l,
/// with L = min(max_terms, deg outer). `inner_powers(l)` must return inner^l
/// truncated at `order`. Throws ErrorKind::convergence when the tail estimate
/// exceeds `tail_tol`.
Composition compose(const CoeffSeries& outer, const PowerTable& inner_powers, int order,
                    int max_terms, double tail_tol, const SeriesLimits& limits = {});

Composition compose(const CoeffSeries& outer, const CoeffSeries& inner, int order,
                    const SeriesLimits& limits = {});

/// Horner evaluation of sum_m a[m] t^m.
template <std::floating_point Real>
Real eval_series(const CoeffSeries& a, Real t) {
  const auto c = a.coeffs();
  Real acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + static_cast<Real>(*it);
  return acc;
}

inline double eval_series(const CoeffSeries& a, double t) { return eval_series<double>(a, t); }

}  // namespace harmonica
