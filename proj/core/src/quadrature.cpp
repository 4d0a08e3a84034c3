#include "harmonica/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

#include <Eigen/Eigenvalues>

#include "harmonica/error.hpp"

namespace harmonica {

QuadratureRule gauss_gegenbauer(int nodes, long double a) {
  if (nodes < 1) throw Error(ErrorKind::domain, "quadrature needs at least one node");
  if (!(a > -1.0L)) throw Error(ErrorKind::domain, "Gegenbauer weight exponent must exceed -1");
  const long double pi = std::numbers::pi_v<long double>;
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(nodes));
  rule.weights.resize(static_cast<std::size_t>(nodes));

  if (a == -0.5L) {
    for (int i = 0; i < nodes; ++i) {
      rule.nodes[static_cast<std::size_t>(i)] =
          std::cos((2.0L * (i + 1) - 1.0L) * pi / (2.0L * nodes));
      rule.weights[static_cast<std::size_t>(i)] = pi / nodes;
    }
    return rule;
  }

  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  VecL diag = VecL::Zero(nodes);
  VecL sub(std::max(nodes - 1, 0));
  for (int k = 1; k < nodes; ++k) {
    const long double kk = k;
    sub(k - 1) = std::sqrt(kk * (kk + 2 * a) / ((2 * kk + 2 * a + 1) * (2 * kk + 2 * a - 1)));
  }
  Eigen::SelfAdjointEigenSolver<MatL> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::quadrature, "Golub-Welsch eigensolve failed");
  }
  const long double mass = std::sqrt(pi) * std::tgamma(a + 1) / std::tgamma(a + 1.5L);
  auto beta = [a](int k) {
    const long double kk = k;
    return std::sqrt(kk * (kk + 2 * a) / ((2 * kk + 2 * a + 1) * (2 * kk + 2 * a - 1)));
  };
  // The eigensolve loses a few digits; Newton steps on the orthonormal
  // recurrence restore the nodes and the Christoffel sums give the weights.
  for (int i = 0; i < nodes; ++i) {
    long double x = solver.eigenvalues()(i);
    long double christoffel = 0;
    for (int iter = 0; iter < 3; ++iter) {
      long double p_prev = 0, p = 1 / std::sqrt(mass);
      long double dp_prev = 0, dp = 0;
      christoffel = p * p;
      for (int k = 0; k < nodes; ++k) {
        const long double b_next = beta(k + 1);
        const long double b_cur = k > 0 ? beta(k) : 0;
        const long double p_next = (x * p - b_cur * p_prev) / b_next;
        const long double dp_next = (p + x * dp - b_cur * dp_prev) / b_next;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
        if (k + 1 < nodes) christoffel += p * p;
      }
      if (dp != 0) x -= p / dp;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 1 / christoffel;
  }
  return rule;
}

const QuadratureRule& sphere_rule(int d, int nodes) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{d, nodes}];
  if (!slot) {
    slot = std::make_unique<QuadratureRule>(
        gauss_gegenbauer(nodes, (static_cast<long double>(d) - 3.0L) / 2.0L));
  }
  return *slot;
}

}  // namespace harmonica
