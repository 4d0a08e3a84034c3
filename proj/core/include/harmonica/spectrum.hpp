#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "harmonica/image.hpp"
#include "harmonica/kernel.hpp"
#include "harmonica/taylor.hpp"

namespace harmonica {

/// lambda[k][alpha] for 0 <= k <= K_max, 0 <= alpha <= A_max from the closed
/// form series in s, together with the ratio kappa between Funk-Hecke
/// quadrature and that closed form.
struct LambdaTable {
  int d = 2;
  int K_max = 0;
  int A_max = 0;
  int series_order = 0;                        // order of f1^alpha actually used
  std::vector<std::vector<double>> lambda;     // [k][alpha]
  std::vector<std::vector<double>> tail;       // last s-term / partial sum
  double kappa = 1.0;                          // quadrature / closed form
  double kappa_spread = 0.0;                   // max |kappa_k / kappa - 1|
  int kappa_samples = 0;

  double at(int k, int alpha) const {
    return lambda[static_cast<std::size_t>(k)][static_cast<std::size_t>(alpha)];
  }
};

struct LambdaOptions {
  int kappa_k_max = 10;     // degrees compared against quadrature (0 disables)
  int initial_margin = 128; // starting series order is K_max + margin
  int order_cap = 8192;
};

/// Table for f1 given by a generator that returns the series at any order;
/// the order grows until every s-series meets its stopping rule.
LambdaTable lambda_table(const std::function<CoeffSeries(int)>& f1_source, int d, int K_max,
                         int A_max, double s_tol, const LambdaOptions& options = {});
/// Table for the polynomial with coefficients f1 (exact, no growth needed).
LambdaTable lambda_table(const CoeffSeries& f1, int d, int K_max, int A_max, double s_tol,
                         const LambdaOptions& options = {});
/// Table sized for `spec`: alpha runs over the outer degree range q_limit().
LambdaTable lambda_table(const KernelSpec& spec, int K_max, const LambdaOptions& options = {});

/// One closed-form entry lambda_{k,alpha} from the coefficients of f1^alpha
/// (exposed for tests). `converged` reports whether the stopping rule fired
/// before the coefficients ran out.
struct LambdaEntry {
  double value = 0.0;
  double tail = 0.0;
  bool converged = false;
};
LambdaEntry lambda_entry(const CoeffSeries& f1_power, bool exact_polynomial, int k, int d,
                         double s_tol);

/// Per-patch degrees in non-increasing order; the canonical key of a profile.
using DegreeProfile = std::vector<int>;
DegreeProfile canonical(DegreeProfile profile);
int nonzero_count(const DegreeProfile& profile);
std::string profile_string(const DegreeProfile& profile);

struct SpectrumEntry {
  DegreeProfile profile;
  double mu = 0.0;
  std::uint64_t multiplicity = 0;
};

/// mu for a degree profile (any order of the degrees):
///   sum_q a_q sum_{|alpha| = q} multinomial(q; alpha) prod_i lambda[k_i][alpha_i],
/// evaluated as sum_q a_q q! [z^q] prod_i h_{k_i}(z) with
/// h_k(z) = sum_alpha lambda[k][alpha] z^alpha / alpha!. Closed-form scale,
/// i.e. without the kappa^n factor.
double mu_eigenvalue(const KernelSpec& spec, const DegreeProfile& profile,
                     const LambdaTable& table);

/// Number of arrangements of the multiset times prod_i alpha_{k_i,d}.
std::uint64_t profile_multiplicity(const DegreeProfile& profile, int d);

struct EnumerateOptions {
  bool prune = true;     // skip profiles with more than d* nonzero degrees
  bool keep_zeros = false;
  unsigned threads = 1;
};

/// Sorted by mu descending, then total degree ascending, then profile.
std::vector<SpectrumEntry> enumerate_spectrum(const KernelSpec& spec, const LambdaTable& table,
                                              int K_max, const EnumerateOptions& options = {});

/// Eigenvalues >= lam, counted with multiplicity.
std::uint64_t counting_function(std::span<const SpectrumEntry> spectrum, double lam);

/// Ranked eigenvalues with multiplicity, at most `limit` of them.
std::vector<double> expand_spectrum(std::span<const SpectrumEntry> spectrum, std::size_t limit);

struct DecayFitOptions {
  std::size_t rank_lo = 20;
  std::size_t rank_hi = 2000;
  double p_min = 0.2;
  double p_max = 20.0;
  int grid = 400;
  std::size_t min_points = 100;  // positive eigenvalues required
};

struct DecayFit {
  double exponent_p = 0.0;     // log mu_m ~ c - gamma m^{1/p}
  double gamma = 0.0;
  double intercept = 0.0;
  double goodness = 0.0;       // R^2 of the stretched-exponential fit
  double counting_slope = 0.0; // slope of log N(lam) against log log(mu_0 / lam)
  std::size_t points = 0;
};

/// Fit on a ranked sequence where mu[m] is the eigenvalue of rank m.
DecayFit fit_decay(std::span<const double> mu, const DecayFitOptions& options = {});
/// Fit on a spectrum with multiplicities: each plateau contributes its first
/// rank to the stretched-exponential fit and its last rank to the counting
/// regression.
DecayFit fit_decay(std::span<const SpectrumEntry> spectrum, const DecayFitOptions& options = {});

/// Spectral evaluation of K(x, y) over all degree tuples with k_i <= K_max,
/// scaled by kappa^n to target eval_kernel.
double mercer_reconstruct(const KernelSpec& spec, const LambdaTable& table,
                          const PatchedImage& x, const PatchedImage& y, int K_max);

/// Largest number of nonzero degrees among entries with mu > 0.
int max_interaction_order(std::span<const SpectrumEntry> spectrum);

}  // namespace harmonica
