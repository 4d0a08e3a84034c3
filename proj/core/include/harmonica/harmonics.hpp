#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "harmonica/error.hpp"
#include "harmonica/taylor.hpp"

namespace harmonica {

/// Dimension of the space of degree-m spherical harmonics on S^{d-1}.
std::uint64_t harmonic_dim(int m, int d);

/// Surface area |S^{d-1}| of the unit sphere in R^d (d = 1 gives the two
/// point sphere, area 2).
double sphere_surface(int d);
long double sphere_surface_ld(int d);

/// Degree-k ultraspherical polynomial on S^{d-1}, normalized so that
/// P_{k,d}(1) = 1 (Legendre for d = 3, Chebyshev T_k for d = 2).
template <std::floating_point Real>
Real zonal_poly(int k, int d, Real t) {
  if (k < 0 || d < 2) throw Error(ErrorKind::domain, "zonal_poly needs k >= 0 and d >= 2");
  if (std::abs(t) > Real(1) + Real(1e-12)) {
    throw Error(ErrorKind::domain, "zonal_poly argument outside [-1, 1]");
  }
  t = std::clamp(t, Real(-1), Real(1));
  if (k == 0) return Real(1);
  Real prev = 1;
  Real cur = t;
  const Real dd = static_cast<Real>(d);
  // (j + d - 2) P_{j+1} = (2j + d - 2) t P_j - j P_{j-1}
  for (int j = 1; j < k; ++j) {
    const Real jj = static_cast<Real>(j);
    const Real next = ((2 * jj + dd - 2) * t * cur - jj * prev) / (jj + dd - 2);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Values P_{0,d}(t) .. P_{k_max,d}(t) from one recurrence pass.
std::vector<double> zonal_polys(int k_max, int d, double t);

/// Addition theorem: sum_l Y_k^l(x) Y_k^l(y) = alpha_{k,d} / |S^{d-1}| * P_{k,d}(<x,y>).
double zonal_pair_sum(int k, int d, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y);

/// zonal_pair_sum for k = 0 .. k_max given the inner product t = <x, y>.
std::vector<double> zonal_pair_sums(int k_max, int d, double t);

struct FunkHeckeOptions {
  int initial_nodes = 64;
  int max_nodes = 512;
  double rel_tol = 1e-13;
};

/// Eigenvalue of the dot-product kernel g(<x,y>) on degree-k harmonics of
/// S^{d-1}, under the unnormalized surface measure:
///   |S^{d-2}| * int_{-1}^{1} g(t) P_{k,d}(t) (1 - t^2)^{(d-3)/2} dt.
/// Gauss rules adapted to the endpoint weight, evaluated in long double and
/// doubled until two successive rules agree; ErrorKind::quadrature otherwise.
double funk_hecke_eigenvalue(const CoeffSeries& g, int k, int d,
                             const FunkHeckeOptions& options = {});
double funk_hecke_eigenvalue(const std::function<long double(long double)>& g, int k, int d,
                             const FunkHeckeOptions& options = {});

}  // namespace harmonica
