#include "harmonica/activations.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> signed_coefficients(const ActivationSpec& spec, int order) {
  const auto width = static_cast<std::size_t>(order) + 1;
  std::vector<double> c(width, 0.0);
  switch (spec.kind) {
    case ActivationKind::exp: {
      double term = 1.0;
      for (std::size_t t = 0; t < width; ++t) {
        c[t] = term;
        term /= static_cast<double>(t + 1);
      }
      break;
    }
    case ActivationKind::square:
      if (width > 2) c[2] = 1.0;
      break;
    case ActivationKind::polynomial:
      for (std::size_t t = 0; t < width && t < spec.coefficients.size(); ++t) {
        c[t] = spec.coefficients[t];
      }
      break;
    case ActivationKind::custom:
      if (spec.geometric_ratio) {
        double term = 1.0;
        for (double& v : c) {
          v = term;
          term *= *spec.geometric_ratio;
        }
      } else {
        for (std::size_t t = 0; t < width && t < spec.coefficients.size(); ++t) {
          c[t] = spec.coefficients[t];
        }
      }
      break;
    case ActivationKind::erf_sigmoid: {
      // 1/2 (1 + erf(sqrt(pi) x)) = 1/2 + sum_n (-1)^n pi^n x^{2n+1} / (n! (2n+1))
      c[0] = 0.5;
      double pi_pow_over_fact = 1.0;  // pi^n / n!
      for (int n = 0; 2 * n + 1 <= order; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        c[static_cast<std::size_t>(2 * n + 1)] = sign * pi_pow_over_fact / (2.0 * n + 1.0);
        pi_pow_over_fact *= kPi / static_cast<double>(n + 1);
      }
      break;
    }
    case ActivationKind::smooth_hinge: {
      // x erf(x) + exp(-pi x^2) / (2 pi):
      //   x erf(x)          = 2/sqrt(pi) sum_{m>=1} (-1)^{m-1} x^{2m} / ((m-1)! (2m-1))
      //   exp(-pi x^2)/(2pi) = 1/(2pi) sum_{m>=0} (-pi)^m x^{2m} / m!
      c[0] = 1.0 / (2.0 * kPi);
      double inv_fact_prev = 1.0;      // 1 / (m-1)!
      double pi_pow_over_fact = kPi;   // pi^m / m!, starting at m = 1
      for (int m = 1; 2 * m <= order; ++m) {
        const double sign = (m % 2 == 1) ? 1.0 : -1.0;  // (-1)^{m-1}
        const double erf_part =
            sign * 2.0 / std::sqrt(kPi) * inv_fact_prev / (2.0 * m - 1.0);
        const double gauss_part = -sign * pi_pow_over_fact / (2.0 * kPi);
        c[static_cast<std::size_t>(2 * m)] = erf_part + gauss_part;
        inv_fact_prev /= static_cast<double>(m);
        pi_pow_over_fact *= kPi / static_cast<double>(m + 1);
      }
      break;
    }
    default:
      throw Error(ErrorKind::unsupported_activation, "unsupported activation kind");
  }
  return c;
}

}  // namespace

std::string_view to_string(ActivationKind kind) noexcept {
  switch (kind) {
    case ActivationKind::exp: return "exp";
    case ActivationKind::square: return "square";
    case ActivationKind::polynomial: return "poly";
    case ActivationKind::erf_sigmoid: return "erf_sigmoid";
    case ActivationKind::smooth_hinge: return "smooth_hinge";
    case ActivationKind::custom: return "custom";
  }
  return "unknown";
}

ActivationKind parse_activation_kind(std::string_view name) {
  if (name == "exp") return ActivationKind::exp;
  if (name == "square") return ActivationKind::square;
  if (name == "poly" || name == "polynomial") return ActivationKind::polynomial;
  if (name == "erf_sigmoid") return ActivationKind::erf_sigmoid;
  if (name == "smooth_hinge") return ActivationKind::smooth_hinge;
  if (name == "custom") return ActivationKind::custom;
  throw Error(ErrorKind::unsupported_activation,
              "unsupported activation '" + std::string(name) + "'");
}

void ActivationSpec::validate() const {
  for (double c : coefficients) {
    if (!std::isfinite(c)) {
      throw Error(ErrorKind::validation, "activation coefficients must be finite");
    }
  }
  switch (kind) {
    case ActivationKind::polynomial:
      if (coefficients.empty()) {
        throw Error(ErrorKind::validation, "polynomial activation needs at least one coefficient");
      }
      break;
    case ActivationKind::custom:
      if (geometric_ratio) {
        const double r = *geometric_ratio;
        if (!(r > 0.0 && r < 1.0)) {
          throw Error(ErrorKind::validation, "geometric ratio must lie in (0, 1)");
        }
      } else if (coefficients.empty()) {
        throw Error(ErrorKind::validation,
                    "custom activation needs coefficients or a geometric ratio");
      }
      break;
    case ActivationKind::exp:
    case ActivationKind::square:
    case ActivationKind::erf_sigmoid:
    case ActivationKind::smooth_hinge:
      break;
    default:
      throw Error(ErrorKind::unsupported_activation, "unsupported activation kind");
  }
}

std::optional<int> ActivationSpec::polynomial_degree() const {
  switch (kind) {
    case ActivationKind::square:
      return 2;
    case ActivationKind::polynomial:
    case ActivationKind::custom: {
      if (kind == ActivationKind::custom && geometric_ratio) return std::nullopt;
      for (int t = static_cast<int>(coefficients.size()) - 1; t >= 0; --t) {
        if (coefficients[static_cast<std::size_t>(t)] != 0.0) return t;
      }
      return 0;
    }
    default:
      return std::nullopt;
  }
}

bool ActivationSpec::all_derivatives_nonzero(int order) const {
  if (polynomial_degree()) return false;
  const auto c = signed_coefficients(*this, order);
  for (double v : c) {
    if (v == 0.0) return false;
  }
  return true;
}

double ActivationSpec::operator()(double x) const {
  switch (kind) {
    case ActivationKind::exp:
      return std::exp(x);
    case ActivationKind::square:
      return x * x;
    case ActivationKind::erf_sigmoid:
      return 0.5 * (1.0 + std::erf(std::sqrt(kPi) * x));
    case ActivationKind::smooth_hinge:
      return x * std::erf(x) + std::exp(-kPi * x * x) / (2.0 * kPi);
    case ActivationKind::custom:
      if (geometric_ratio) return 1.0 / (1.0 - *geometric_ratio * x);
      [[fallthrough]];
    case ActivationKind::polynomial: {
      double acc = 0.0;
      for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
  }
  throw Error(ErrorKind::unsupported_activation, "unsupported activation kind");
}

CoeffSeries majorant_series(const ActivationSpec& spec, int order) {
  if (order < 0) throw Error(ErrorKind::domain, "majorant order must be non-negative");
  spec.validate();
  auto c = signed_coefficients(spec, order);
  for (double& v : c) v = std::abs(v);
  return CoeffSeries(std::move(c));
}

double majorant_value(const ActivationSpec& spec, double t) {
  switch (spec.kind) {
    case ActivationKind::exp:
      return std::exp(t);
    case ActivationKind::square:
      return t * t;
    case ActivationKind::custom:
      if (spec.geometric_ratio) {
        const double r = *spec.geometric_ratio;
        if (std::abs(r * t) >= 1.0) {
          throw Error(ErrorKind::domain, "geometric majorant evaluated outside its radius");
        }
        return 1.0 / (1.0 - r * t);
      }
      [[fallthrough]];
    case ActivationKind::polynomial: {
      double acc = 0.0;
      for (auto it = spec.coefficients.rbegin(); it != spec.coefficients.rend(); ++it) {
        acc = acc * t + std::abs(*it);
      }
      return acc;
    }
    case ActivationKind::erf_sigmoid:
    case ActivationKind::smooth_hinge: {
      // Coefficients fall off like pi^m / m!, so degree 160 is exact in double
      // for every argument the kernel produces.
      static const CoeffSeries erf_series = majorant_series(ActivationSpec::erf_sigmoid(), 160);
      static const CoeffSeries hinge_series = majorant_series(ActivationSpec::smooth_hinge(), 160);
      return eval_series(spec.kind == ActivationKind::erf_sigmoid ? erf_series : hinge_series, t);
    }
  }
  throw Error(ErrorKind::unsupported_activation, "unsupported activation kind");
}

}  // namespace harmonica
