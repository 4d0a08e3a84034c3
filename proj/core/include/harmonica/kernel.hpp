#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "harmonica/activations.hpp"
#include "harmonica/image.hpp"
#include "harmonica/taylor.hpp"

namespace harmonica {

struct Truncation {
  int K_max = 20;          // largest per-patch harmonic degree
  int A_max = 16;          // largest power of f1 in the eigenvalue table
  int Q_max = 64;          // outer coefficients a_q kept when D is infinite
  double s_tol = 1e-12;    // relative stopping threshold of the s-series
  int series_order = 64;   // order of the stored f1 series
  int compose_terms = 64;  // outer terms summed per composition step
  double compose_tail_tol = 1e-10;
};

/// The multi-layer kernel K(x, y) = g(sum_i f1(<x_i, y_i>)) with
/// g = f_N o ... o f_2 built from the activation majorants.
struct KernelSpec {
  std::vector<ActivationSpec> layers;
  int n = 1;
  int d = 2;
  CoeffSeries f1;                 // majorant of layers[0] at truncation.series_order
  CoeffSeries g;                  // a_q for q <= max(Q_max, D)
  std::optional<int> D;           // outer polynomial degree, nullopt when infinite
  int d_star = 1;                 // min(D, n), or n when D is infinite
  double g_tail = 0.0;            // relative tail estimate of the composition
  Truncation truncation;

  /// f1 regenerated at any order (used by the eigenvalue table).
  CoeffSeries f1_series(int order) const { return majorant_series(layers.front(), order); }
  double f1_value(double t) const { return majorant_value(layers.front(), t); }
  /// g(s) evaluated through the scalar majorants f_2, ..., f_N.
  double g_value(double s) const;
  /// Highest outer index q that can carry a nonzero a_q in spectral sums.
  int q_limit() const { return D ? *D : truncation.Q_max; }
};

/// N = 1 yields g = identity. Throws ErrorKind::convergence when an outer
/// composition does not settle within truncation.compose_terms.
KernelSpec build_kernel(const std::vector<ActivationSpec>& layers, int n, int d,
                        const Truncation& truncation = {});

/// Patch inner products are clamped to [-1, 1] before evaluation.
double eval_kernel(const KernelSpec& spec, const PatchedImage& x, const PatchedImage& y);

Eigen::MatrixXd gram(const KernelSpec& spec, const std::vector<PatchedImage>& xs,
                     unsigned threads = 1);
/// G[i][j] = K(xs[i], ys[j]).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const std::vector<PatchedImage>& xs,
                           const std::vector<PatchedImage>& ys, unsigned threads = 1);

}  // namespace harmonica
