#include "harmonica/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "harmonica/quadrature.hpp"

namespace harmonica {
namespace {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __extension__ using u128 = unsigned __int128;
  u128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      throw Error(ErrorKind::domain, "harmonic dimension overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace

std::uint64_t harmonic_dim(int m, int d) {
  if (m < 0 || d < 2) throw Error(ErrorKind::domain, "harmonic_dim needs m >= 0 and d >= 2");
  if (m == 0) return 1;
  if (m == 1) return static_cast<std::uint64_t>(d);
  return binomial(d - 1 + m, m) - binomial(d - 3 + m, m - 2);
}

long double sphere_surface_ld(int d) {
  if (d < 1) throw Error(ErrorKind::domain, "sphere_surface needs d >= 1");
  const long double half = static_cast<long double>(d) / 2.0L;
  return 2.0L * std::pow(std::numbers::pi_v<long double>, half) / std::tgamma(half);
}

double sphere_surface(int d) { return static_cast<double>(sphere_surface_ld(d)); }

std::vector<double> zonal_polys(int k_max, int d, double t) {
  if (k_max < 0 || d < 2) throw Error(ErrorKind::domain, "zonal_polys needs k_max >= 0, d >= 2");
  if (std::abs(t) > 1.0 + 1e-12) throw Error(ErrorKind::domain, "zonal_polys argument outside [-1, 1]");
  t = std::clamp(t, -1.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(k_max) + 1);
  p[0] = 1.0;
  if (k_max >= 1) p[1] = t;
  const double dd = d;
  for (int j = 1; j < k_max; ++j) {
    const auto u = static_cast<std::size_t>(j);
    p[u + 1] = ((2.0 * j + dd - 2.0) * t * p[u] - j * p[u - 1]) / (j + dd - 2.0);
  }
  return p;
}

std::vector<double> zonal_pair_sums(int k_max, int d, double t) {
  auto p = zonal_polys(k_max, d, t);
  const double area = sphere_surface(d);
  for (int k = 0; k <= k_max; ++k) {
    p[static_cast<std::size_t>(k)] *= static_cast<double>(harmonic_dim(k, d)) / area;
  }
  return p;
}

double zonal_pair_sum(int k, int d, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != d || y.size() != d) {
    throw Error(ErrorKind::structural, "zonal_pair_sum: vectors must have dimension d");
  }
  const double t = std::clamp(x.dot(y), -1.0, 1.0);
  return static_cast<double>(harmonic_dim(k, d)) / sphere_surface(d) * zonal_poly(k, d, t);
}

double funk_hecke_eigenvalue(const std::function<long double(long double)>& g, int k, int d,
                             const FunkHeckeOptions& options) {
  if (k < 0 || d < 2) throw Error(ErrorKind::domain, "funk_hecke_eigenvalue needs k >= 0, d >= 2");
  const long double prefactor = sphere_surface_ld(d - 1);

  // Returns {integral, sum of |integrand| contributions} for one rule.
  auto integrate = [&](int nodes) {
    const auto& rule = sphere_rule(d, nodes);
    long double acc = 0;
    long double scale = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const long double t = rule.nodes[i];
      const long double v = rule.weights[i] * g(t) * zonal_poly<long double>(k, d, t);
      acc += v;
      scale += std::abs(v);
    }
    return std::pair{acc, scale};
  };

  int nodes = std::max(options.initial_nodes, k + 2);
  auto [prev, prev_scale] = integrate(nodes);
  while (nodes * 2 <= options.max_nodes) {
    nodes *= 2;
    auto [cur, scale] = integrate(nodes);
    const long double diff = std::abs(cur - prev);
    if (!std::isfinite(static_cast<double>(cur))) break;
    if (diff <= options.rel_tol * std::max(std::abs(cur), 1e-3L * scale)) {
      return static_cast<double>(prefactor * cur);
    }
    prev = cur;
    prev_scale = scale;
  }
  throw Error(ErrorKind::quadrature,
              "Funk-Hecke quadrature did not converge for k=" + std::to_string(k) +
                  ", d=" + std::to_string(d));
}

double funk_hecke_eigenvalue(const CoeffSeries& g, int k, int d, const FunkHeckeOptions& options) {
  return funk_hecke_eigenvalue([&g](long double t) { return eval_series<long double>(g, t); }, k,
                               d, options);
}

}  // namespace harmonica
