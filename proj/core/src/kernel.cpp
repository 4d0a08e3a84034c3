#include "harmonica/kernel.hpp"

#include <algorithm>
#include <string>

#include "harmonica/error.hpp"
#include "harmonica/parallel.hpp"

namespace harmonica {

double KernelSpec::g_value(double s) const {
  for (std::size_t i = 1; i < layers.size(); ++i) s = majorant_value(layers[i], s);
  return s;
}

KernelSpec build_kernel(const std::vector<ActivationSpec>& layers, int n, int d,
                        const Truncation& truncation) {
  if (layers.empty()) throw Error(ErrorKind::validation, "kernel needs at least one layer");
  if (n < 1) throw Error(ErrorKind::validation, "patch count n must be >= 1");
  if (d < 2) throw Error(ErrorKind::validation, "patch dimension d must be >= 2");
  if (truncation.K_max < 0 || truncation.A_max < 0 || truncation.Q_max < 1 ||
      truncation.series_order < 1 || truncation.compose_terms < 1 ||
      !(truncation.s_tol > 0.0 && truncation.s_tol < 1.0)) {
    throw Error(ErrorKind::validation, "invalid truncation settings");
  }
  for (const auto& a : layers) a.validate();

  KernelSpec spec;
  spec.layers = layers;
  spec.n = n;
  spec.d = d;
  spec.truncation = truncation;
  spec.f1 = majorant_series(layers.front(), truncation.series_order);

  std::optional<int> D = 1;
  for (std::size_t i = 1; i < layers.size(); ++i) {
    const auto deg = layers[i].polynomial_degree();
    if (!deg || !D) {
      D.reset();
    } else {
      D = *D * *deg;
    }
  }
  spec.D = D;
  spec.d_star = D ? std::min(*D, n) : n;

  const int order = D ? std::max(truncation.Q_max, *D) : truncation.Q_max;
  SeriesLimits limits;
  limits.compose_terms = truncation.compose_terms;
  limits.compose_tail_tol = truncation.compose_tail_tol;
  limits.order_cap = std::max(limits.order_cap, order);

  // Outer majorants keep two terms past the budget so compose() can estimate
  // the dropped tail of infinite series.
  const int outer_order = std::max(order, truncation.compose_terms + 2);
  if (layers.size() == 1) {
    spec.g = CoeffSeries::monomial(1, order);
  } else {
    CoeffSeries inner = majorant_series(layers[1], order);
    double tail = 0.0;
    for (std::size_t i = 2; i < layers.size(); ++i) {
      const auto outer = majorant_series(layers[i], outer_order);
      auto comp = compose(outer, inner, order, limits);
      tail = std::max(tail, comp.tail_estimate);
      inner = std::move(comp.series);
    }
    spec.g = std::move(inner);
    spec.g_tail = tail;
  }
  return spec;
}

namespace {

void check_pair(const KernelSpec& spec, const PatchedImage& x) {
  if (x.count() != spec.n || x.dim() != spec.d) {
    throw Error(ErrorKind::structural,
                "input has " + std::to_string(x.count()) + " patches of dimension " +
                    std::to_string(x.dim()) + ", kernel expects " + std::to_string(spec.n) +
                    " of dimension " + std::to_string(spec.d));
  }
}

double eval_unchecked(const KernelSpec& spec, const PatchedImage& x, const PatchedImage& y) {
  double s = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    const double t = std::clamp(x.patch(i).dot(y.patch(i)), -1.0, 1.0);
    s += spec.f1_value(t);
  }
  return spec.g_value(s);
}

}  // namespace

double eval_kernel(const KernelSpec& spec, const PatchedImage& x, const PatchedImage& y) {
  check_pair(spec, x);
  check_pair(spec, y);
  return eval_unchecked(spec, x, y);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const std::vector<PatchedImage>& xs,
                     unsigned threads) {
  for (const auto& x : xs) check_pair(spec, x);
  const auto m = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd G(m, m);
  // Row i owns the cells (i, j) and (j, i) for j >= i.
  parallel_for(0, xs.size(), threads, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = ii; j < m; ++j) {
      const double v = eval_unchecked(spec, xs[i], xs[static_cast<std::size_t>(j)]);
      G(ii, j) = v;
      G(j, ii) = v;
    }
  });
  return G;
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const std::vector<PatchedImage>& xs,
                           const std::vector<PatchedImage>& ys, unsigned threads) {
  for (const auto& x : xs) check_pair(spec, x);
  for (const auto& y : ys) check_pair(spec, y);
  Eigen::MatrixXd G(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  parallel_for(0, xs.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          eval_unchecked(spec, xs[i], ys[j]);
    }
  });
  return G;
}

}  // namespace harmonica
