#pragma once

#include <vector>

namespace harmonica {

struct QuadratureRule {
  std::vector<long double> nodes;
  std::vector<long double> weights;
};

/// Gauss rule for int_{-1}^{1} f(t) (1 - t^2)^a dt with a > -1. The a = -1/2
/// case is the closed-form Gauss-Chebyshev rule; other exponents come from
/// the Golub-Welsch eigenproblem of the symmetric Jacobi matrix.
QuadratureRule gauss_gegenbauer(int nodes, long double a);

/// Cached rule for the weight (1 - t^2)^{(d-3)/2} of the Funk-Hecke integral
/// on S^{d-1}. The returned reference stays valid for the program lifetime.
const QuadratureRule& sphere_rule(int d, int nodes);

}  // namespace harmonica
