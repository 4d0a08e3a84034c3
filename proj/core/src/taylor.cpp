#include "harmonica/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

void check_order(int order, const SeriesLimits& limits) {
  if (order < 0) {
    throw Error(ErrorKind::domain, "series order must be non-negative, got " +
                                       std::to_string(order));
  }
  if (order > limits.order_cap) {
    throw Error(ErrorKind::truncation_cap,
                "series order " + std::to_string(order) + " exceeds the configured cap " +
                    std::to_string(limits.order_cap));
  }
}

}  // namespace

CoeffSeries::CoeffSeries() : coeffs_(1, 0.0), nonneg_(true) {}

CoeffSeries::CoeffSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  nonneg_ = true;
  for (double c : coeffs_) {
    if (!std::isfinite(c)) {
      throw Error(ErrorKind::domain, "series coefficients must be finite");
    }
    if (c < 0.0) nonneg_ = false;
  }
}

CoeffSeries::CoeffSeries(std::initializer_list<double> coeffs)
    : CoeffSeries(std::vector<double>(coeffs)) {}

CoeffSeries CoeffSeries::constant(double value, int order) {
  std::vector<double> c(static_cast<std::size_t>(std::max(order, 0)) + 1, 0.0);
  c[0] = value;
  return CoeffSeries(std::move(c));
}

CoeffSeries CoeffSeries::monomial(int degree, int order) {
  std::vector<double> c(static_cast<std::size_t>(std::max(order, 0)) + 1, 0.0);
  if (degree >= 0 && degree <= order) c[static_cast<std::size_t>(degree)] = 1.0;
  return CoeffSeries(std::move(c));
}

CoeffSeries CoeffSeries::exponential(int order, double rate) {
  std::vector<double> c(static_cast<std::size_t>(std::max(order, 0)) + 1, 0.0);
  double term = 1.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    c[m] = term;
    term *= rate / static_cast<double>(m + 1);
  }
  return CoeffSeries(std::move(c));
}

CoeffSeries CoeffSeries::geometric(double ratio, int order) {
  std::vector<double> c(static_cast<std::size_t>(std::max(order, 0)) + 1, 0.0);
  double term = 1.0;
  for (double& v : c) {
    v = term;
    term *= ratio;
  }
  return CoeffSeries(std::move(c));
}

std::optional<int> CoeffSeries::degree() const noexcept {
  for (int m = order(); m >= 0; --m) {
    if (coeffs_[static_cast<std::size_t>(m)] != 0.0) return m;
  }
  return std::nullopt;
}

CoeffSeries CoeffSeries::truncated(int new_order) const {
  std::vector<double> c(static_cast<std::size_t>(std::max(new_order, 0)) + 1, 0.0);
  const auto keep = std::min(c.size(), coeffs_.size());
  std::copy_n(coeffs_.begin(), keep, c.begin());
  return CoeffSeries(std::move(c));
}

CoeffSeries cauchy_product(const CoeffSeries& a, const CoeffSeries& b, int order,
                           const SeriesLimits& limits) {
  check_order(order, limits);
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  const int na = a.order();
  const int nb = b.order();
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  for (int m = 0; m <= order; ++m) {
    const int k_lo = std::max(0, m - nb);
    const int k_hi = std::min(m, na);
    // Terms are summed in mirrored pairs so that swapping a and b gives
    // bit-identical results.
    auto term = [&](int k) {
      return ca[static_cast<std::size_t>(k)] * cb[static_cast<std::size_t>(m - k)];
    };
    double acc = 0.0;
    int lo = k_lo;
    int hi = k_hi;
    for (; lo < hi; ++lo, --hi) acc += term(lo) + term(hi);
    if (lo == hi) acc += term(lo);
    out[static_cast<std::size_t>(m)] = acc;
  }
  return CoeffSeries(std::move(out));
}

CoeffSeries power(const CoeffSeries& a, int alpha, int order, const SeriesLimits& limits) {
  if (alpha < 0) {
    throw Error(ErrorKind::domain, "series power requires alpha >= 0");
  }
  check_order(order, limits);
  CoeffSeries result = CoeffSeries::constant(1.0, order);
  for (int i = 0; i < alpha; ++i) result = cauchy_product(result, a, order, limits);
  return result;
}

std::vector<CoeffSeries> powers(const CoeffSeries& a, int max_alpha, int order,
                                const SeriesLimits& limits) {
  if (max_alpha < 0) {
    throw Error(ErrorKind::domain, "series power requires alpha >= 0");
  }
  check_order(order, limits);
  std::vector<CoeffSeries> out;
  out.reserve(static_cast<std::size_t>(max_alpha) + 1);
  out.push_back(CoeffSeries::constant(1.0, order));
  for (int i = 1; i <= max_alpha; ++i) {
    out.push_back(cauchy_product(out.back(), a, order, limits));
  }
  return out;
}

Composition compose(const CoeffSeries& outer, const PowerTable& inner_powers, int order,
                    int max_terms, double tail_tol, const SeriesLimits& limits) {
  check_order(order, limits);
  if (!outer.nonneg()) {
    throw Error(ErrorKind::domain, "compose requires an outer series with nonnegative coefficients");
  }
  const auto outer_degree = outer.degree();
  if (!outer_degree) return {CoeffSeries::constant(0.0, order), 0.0, 0};

  const int last = std::min(*outer_degree, std::max(max_terms, 0));
  const auto width = static_cast<std::size_t>(order) + 1;
  std::vector<double> acc(width, 0.0);
  std::vector<double> prev_term(width, 0.0);
  std::vector<double> last_term(width, 0.0);
  int prev_index = -1;
  int last_index = -1;
  int used = 0;

  for (int l = 0; l <= last; ++l) {
    const double weight = outer[l];
    if (weight == 0.0) continue;
    const CoeffSeries p = inner_powers(l);
    if (l == 1 && !p.nonneg()) {
      throw Error(ErrorKind::domain, "compose requires an inner series with nonnegative coefficients");
    }
    prev_term.swap(last_term);
    prev_index = last_index;
    for (std::size_t m = 0; m < width; ++m) {
      last_term[m] = weight * p[static_cast<int>(m)];
      acc[m] += last_term[m];
    }
    last_index = l;
    ++used;
  }

  double tail = 0.0;
  if (*outer_degree > last) {
    // Outer terms past the budget were dropped: extrapolate each coefficient's
    // remaining sum geometrically from the last two summed contributions.
    for (std::size_t m = 0; m < width; ++m) {
      const double t2 = last_term[m];
      if (t2 == 0.0) continue;
      double tail_m = std::numeric_limits<double>::infinity();
      if (prev_index >= 0 && prev_term[m] > 0.0) {
        const double ratio =
            std::pow(t2 / prev_term[m], 1.0 / static_cast<double>(last_index - prev_index));
        if (ratio < 1.0) tail_m = t2 * ratio / (1.0 - ratio);
      }
      const double denom = std::abs(acc[m]);
      tail = std::max(tail, denom > 0.0 ? tail_m / denom : tail_m);
    }
  }
  if (tail > tail_tol) {
    throw Error(ErrorKind::convergence,
                "composition did not converge within " + std::to_string(max_terms) +
                    " outer terms (relative tail estimate " + std::to_string(tail) + ")");
  }
  return {CoeffSeries(std::move(acc)), tail, used};
}

Composition compose(const CoeffSeries& outer, const CoeffSeries& inner, int order,
                    const SeriesLimits& limits) {
  // Successive powers, advanced lazily since compose() asks for increasing l.
  struct State {
    int index = 0;
    CoeffSeries value;
  };
  auto state = std::make_shared<State>(State{0, CoeffSeries::constant(1.0, order)});
  PowerTable table = [state, &inner, order, &limits](int alpha) {
    if (alpha < state->index) {
      return power(inner, alpha, order, limits);
    }
    while (state->index < alpha) {
      state->value = cauchy_product(state->value, inner, order, limits);
      ++state->index;
    }
    return state->value;
  };
  return compose(outer, table, order, limits.compose_terms, limits.compose_tail_tol, limits);
}

}  // namespace harmonica
