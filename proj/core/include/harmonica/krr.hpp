#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "harmonica/cnn.hpp"
#include "harmonica/image.hpp"
#include "harmonica/kernel.hpp"
#include "harmonica/spectrum.hpp"

namespace harmonica {

struct Dataset {
  std::vector<PatchedImage> xs;
  std::vector<double> ys;

  std::size_t size() const noexcept { return xs.size(); }
  void validate() const;
};

struct FitResult {
  Eigen::VectorXd coeffs;          // dual coefficients c
  double lambda = 0.0;
  std::vector<PatchedImage> xs;    // training inputs
  double jitter = 0.0;             // diagonal shift added after a failed factorization
  double train_mse = 0.0;
};

/// Solves (G + lambda * ell * I) c = y by Cholesky. On failure the diagonal
/// is shifted once by 1e-12 * trace(G) / ell; a second failure throws
/// ErrorKind::solver with a condition estimate.
FitResult rls_fit(const KernelSpec& spec, const Dataset& data, double lambda,
                  unsigned threads = 1);
/// Same solve with a precomputed Gram matrix of data.xs.
FitResult rls_fit(const Eigen::MatrixXd& G, const Dataset& data, double lambda);

double predict(const KernelSpec& spec, const FitResult& fit, const PatchedImage& x);
Eigen::VectorXd predict(const KernelSpec& spec, const FitResult& fit,
                        const std::vector<PatchedImage>& xs, unsigned threads = 1);

/// Regime of a source-condition exponent beta in (0, 2].
enum class Regime { above_one, one, below_one };

struct Schedule {
  double beta = 2.0;
  double mu_exp = 0.0;  // log exponent, used only when beta = 1

  Regime regime() const;
  /// Throws ErrorKind::validation unless 0 < beta <= 2 and, for beta = 1,
  /// mu_exp > (d - 1) d*.
  void validate(int d, int d_star) const;
};

/// beta > 1: ell^{-1/beta}; beta = 1: log(ell)^mu / ell;
/// beta < 1: log(ell)^{(d-1) d* / beta} / ell. ell < 3 is a domain error.
double schedule_lambda(const Schedule& s, int ell, int d, int d_star);

/// Top eigenvalues of the Gram matrix of `ell` uniform points, scaled by
/// |S^{d-1}|^n / ell, in non-increasing order.
std::vector<double> nystrom_eigs(const KernelSpec& spec, int ell, int top_k, std::uint64_t seed,
                                 unsigned threads = 1);

struct NystromRow {
  std::size_t rank = 0;
  double nystrom = 0.0;
  double closed_form = 0.0;
  double rel_err = 0.0;
  double cluster_nystrom = 0.0;  // mean estimate over the closed-form eigenspace
  double cluster_rel_err = 0.0;
};

/// Ranks needed so that every eigenspace touching the first `top_k` ranks is
/// covered completely.
std::size_t cluster_cover(std::span<const SpectrumEntry> spectrum, std::size_t top_k);

/// Pairs Nystrom estimates with closed-form eigenvalues kappa^n * mu. The
/// cluster columns average the estimates over each eigenspace's ranks.
std::vector<NystromRow> compare_nystrom(std::span<const double> nystrom,
                                        std::span<const SpectrumEntry> spectrum, double scale,
                                        std::size_t top_k);

using TargetFn = std::function<double(const PatchedImage&)>;

enum class TargetKind { zero, zonal, kernel_sections, source, cnn };
std::string_view to_string(TargetKind kind) noexcept;
TargetKind parse_target_kind(std::string_view name);

struct TargetConfig {
  TargetKind kind = TargetKind::kernel_sections;
  int degree = 1;          // zonal: harmonic degree on the first patch
  int count = 8;           // kernel_sections / source: number of anchor points
  double beta = 1.0;       // source: eigenvalues enter as mu^{beta/2}
  int K_max = 8;           // source: spectral truncation
  std::vector<int> filters;      // cnn
  std::vector<int> patch_sizes;  // cnn
  PoolingKind pooling = PoolingKind::identity;
  double pooling_width = 1.0;
  Boundary boundary = Boundary::circular;
};

/// Builds a deterministic target function for `spec` from `seed`.
TargetFn make_target(const KernelSpec& spec, const TargetConfig& cfg, std::uint64_t seed);

struct LearningPoint {
  int ell = 0;
  double lambda = 0.0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  std::uint64_t seed = 0;
};

/// For each ell: fresh train and test samples from the stream (seed, ell),
/// fit with schedule_lambda and record train and held-out mean squared errors.
std::vector<LearningPoint> learning_curve(const KernelSpec& spec, const TargetFn& target,
                                          const Schedule& schedule, std::span<const int> sizes,
                                          int test_size, std::uint64_t seed, double noise = 0.0,
                                          unsigned threads = 1);

}  // namespace harmonica
