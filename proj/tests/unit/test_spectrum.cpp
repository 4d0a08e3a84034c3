#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "harmonica/error.hpp"
#include "harmonica/harmonics.hpp"
#include "harmonica/spectrum.hpp"
#include "series_oracles.hpp"
#include "sphere_oracles.hpp"

using namespace harmonica;

namespace {

const auto kExp = ActivationSpec::exp();
const auto kSquare = ActivationSpec::square();
const auto kIdentity = ActivationSpec::identity();

// Direct sum over all compositions alpha of q into n parts.
double mu_brute(const KernelSpec& spec, const LambdaTable& table, const DegreeProfile& profile) {
  double mu = 0.0;
  for (int q = 0; q <= spec.q_limit(); ++q) {
    if (spec.g[q] == 0.0) continue;
    double inner = 0.0;
    std::vector<int> cur;
    oracle::compositions(q, spec.n, cur, [&](const std::vector<int>& alpha) {
      double term = oracle::multinomial(alpha);
      for (int i = 0; i < spec.n; ++i) term *= table.at(profile[i], alpha[i]);
      inner += term;
    });
    mu += spec.g[q] * inner;
  }
  return mu;
}

LambdaTable geometric_table(double r, int d, int K_max, int A_max) {
  const auto act = ActivationSpec::geometric(r);
  return lambda_table([&](int order) { return majorant_series(act, order); }, d, K_max, A_max,
                      1e-14);
}

}  // namespace

TEST(LambdaTable, ZeroPowerColumn) {
  for (int d : {2, 3, 5}) {
    const auto table = lambda_table(CoeffSeries::exponential(60), d, 12, 4, 1e-14);
    for (int k = 1; k <= 12; ++k) EXPECT_EQ(table.at(k, 0), 0.0);
    for (int k = 0; k <= 12; ++k) {
      for (int a = 0; a <= 4; ++a) EXPECT_GE(table.at(k, a), 0.0);
    }
  }
}

TEST(LambdaTable, ConstantEntry) {
  for (int d = 2; d <= 6; ++d) {
    const auto table = lambda_table(CoeffSeries::exponential(40), d, 2, 2, 1e-14);
    const double expected = oracle::surface(d - 1) * std::tgamma((d - 1) / 2.0) *
                            std::tgamma(0.5) / (2.0 * std::tgamma(d / 2.0));
    EXPECT_NEAR(table.at(0, 0), expected, 1e-14 * expected) << "d=" << d;
  }
}

TEST(LambdaTable, ExpBesselRatios) {
  const auto table = lambda_table(CoeffSeries::exponential(80), 2, 16, 1, 1e-15);
  for (int k = 0; k < 16; ++k) {
    const double got = table.at(k, 1) / table.at(k + 1, 1);
    const double want = oracle::bessel_i(k, 1.0) / oracle::bessel_i(k + 1, 1.0);
    EXPECT_NEAR(got, want, 1e-8 * want) << "k=" << k;
  }
}

TEST(LambdaTable, KappaAgainstBesselClosedForm) {
  for (int d : {2, 3, 4}) {
    const auto table = lambda_table(CoeffSeries::exponential(80), d, 10, 1, 1e-15);
    EXPECT_LT(table.kappa_spread, 1e-6);
    EXPECT_GT(table.kappa_samples, 5);
    for (int k = 0; k <= 10; ++k) {
      const double want = oracle::funk_hecke_exp(k, d);
      EXPECT_NEAR(table.kappa * table.at(k, 1), want, 1e-6 * want) << "d=" << d << " k=" << k;
    }
  }
}

TEST(LambdaTable, SingleKappaAcrossPowers) {
  for (int d : {2, 3, 4}) {
    const auto exp_table = lambda_table(CoeffSeries::exponential(120), d, 10, 4, 1e-15);
    const auto geo_table = geometric_table(0.5, d, 10, 4);
    for (int a = 1; a <= 4; ++a) {
      const auto exp_pow = [a](long double t) { return std::exp(a * t); };
      const auto geo_pow = [a](long double t) { return std::pow(1.0L - 0.5L * t, -a); };
      for (int k = 0; k <= 10; ++k) {
        const double e = funk_hecke_eigenvalue(exp_pow, k, d);
        EXPECT_NEAR(e / (exp_table.kappa * exp_table.at(k, a)), 1.0, 1e-6)
            << "exp d=" << d << " k=" << k << " a=" << a;
        const double g = funk_hecke_eigenvalue(geo_pow, k, d);
        EXPECT_NEAR(g / (geo_table.kappa * geo_table.at(k, a)), 1.0, 1e-6)
            << "geometric d=" << d << " k=" << k << " a=" << a;
      }
    }
    EXPECT_NEAR(exp_table.kappa / geo_table.kappa, 1.0, 1e-6);
  }
}

TEST(LambdaTable, PolynomialEntriesAreExact) {
  // t^2 = (1/d) P_0 + ... on S^{d-1}: only k = 0 and k = 2 survive.
  const auto table = lambda_table(CoeffSeries{0.0, 0.0, 1.0}, 3, 6, 1, 1e-14);
  for (int k : {1, 3, 4, 5, 6}) EXPECT_EQ(table.at(k, 1), 0.0);
  EXPECT_GT(table.at(0, 1), 0.0);
  EXPECT_GT(table.at(2, 1), 0.0);
}

TEST(LambdaTable, RejectsBadArguments) {
  EXPECT_THROW(lambda_table(CoeffSeries::exponential(10), 1, 4, 2, 1e-12), Error);
  EXPECT_THROW(lambda_table(CoeffSeries::exponential(10), 3, -1, 2, 1e-12), Error);
  EXPECT_THROW(lambda_table(CoeffSeries::exponential(10), 3, 4, 2, 0.0), Error);
}

TEST(LambdaTable, NonConvergentSeriesThrows) {
  LambdaOptions options;
  options.initial_margin = 4;
  options.order_cap = 16;
  // Coefficients that grow forever never satisfy the stopping rule.
  const auto source = [](int order) { return CoeffSeries::geometric(1.0, order); };
  try {
    lambda_table(source, 3, 4, 2, 1e-12, options);
    FAIL() << "expected a convergence error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::convergence);
  }
}

TEST(MuEigenvalue, SquareSquareConstantProfile) {
  for (int d : {2, 3}) {
    const auto spec = build_kernel({kSquare, kSquare}, 2, d);
    const auto table = lambda_table(spec, 4);
    const double l01 = table.at(0, 1);
    const double want = 2.0 * l01 * l01 + 2.0 * table.at(0, 2) * table.at(0, 0);
    EXPECT_NEAR(mu_eigenvalue(spec, {0, 0}, table), want, 1e-14 * want);
    EXPECT_NEAR(mu_brute(spec, table, {0, 0}), want, 1e-14 * want);
  }
}

TEST(MuEigenvalue, MatchesCompositionEnumeration) {
  struct Case {
    std::vector<ActivationSpec> acts;
    int n;
    int d;
  };
  const std::vector<Case> cases = {{{kExp, kSquare}, 3, 3},
                                   {{kSquare, kSquare, kSquare}, 3, 2},
                                   {{kExp, kIdentity}, 2, 4},
                                   {{kExp, kSquare}, 2, 2}};
  for (const auto& c : cases) {
    const auto spec = build_kernel(c.acts, c.n, c.d);
    const auto table = lambda_table(spec, 4);
    EnumerateOptions options;
    options.prune = false;
    options.keep_zeros = true;
    for (const auto& e : enumerate_spectrum(spec, table, 4, options)) {
      const double want = mu_brute(spec, table, e.profile);
      EXPECT_NEAR(e.mu, want, 1e-13 * std::max(want, 1e-300))
          << profile_string(e.profile);
    }
  }
}

TEST(MuEigenvalue, SinglePatchMatchesComposedQuadrature) {
  {
    const auto spec = build_kernel({kExp, kExp}, 1, 3);
    const auto table = lambda_table(spec, 10);
    const auto composed = [](long double t) { return std::exp(std::exp(t)); };
    for (int k = 0; k <= 10; ++k) {
      const double want = funk_hecke_eigenvalue(composed, k, 3);
      EXPECT_NEAR(table.kappa * mu_eigenvalue(spec, {k}, table), want, 1e-6 * want) << k;
    }
  }
  {
    // The composed series itself, through the taylor module.
    const auto spec = build_kernel({kExp, kSquare}, 1, 3);
    const auto table = lambda_table(spec, 10);
    const auto g_f1 = compose(spec.g, spec.f1_series(80), 80).series;
    for (int k = 0; k <= 10; ++k) {
      const double want = funk_hecke_eigenvalue(g_f1, k, 3);
      EXPECT_NEAR(table.kappa * mu_eigenvalue(spec, {k}, table), want, 1e-6 * want) << k;
    }
  }
}

TEST(MuEigenvalue, LinearOuterIsTableColumn) {
  const auto spec = build_kernel({kExp, kIdentity}, 1, 3);
  const auto table = lambda_table(spec, 10);
  for (int k = 0; k <= 10; ++k) EXPECT_EQ(mu_eigenvalue(spec, {k}, table), table.at(k, 1));
}

TEST(MuEigenvalue, PermutationSymmetry) {
  const auto spec = build_kernel({kExp, kExp}, 4, 3);
  const auto table = lambda_table(spec, 6);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> deg(0, 6);
  for (int trial = 0; trial < 20; ++trial) {
    DegreeProfile p(4);
    for (int& k : p) k = deg(rng);
    const double base = mu_eigenvalue(spec, canonical(p), table);
    std::sort(p.begin(), p.end());
    do {
      EXPECT_NEAR(mu_eigenvalue(spec, p, table), base, 1e-13 * base);
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

TEST(MuEigenvalue, Errors) {
  const auto spec = build_kernel({kExp, kSquare}, 2, 3);
  const auto table = lambda_table(spec, 4);
  EXPECT_THROW(mu_eigenvalue(spec, {1, 0, 0}, table), Error);
  try {
    mu_eigenvalue(spec, {5, 0}, table);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::truncation_cap);
  }
  const auto small = lambda_table(spec.f1, 3, 4, 1, 1e-12);
  try {
    mu_eigenvalue(spec, {1, 0}, small);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::truncation_cap);
  }
}

TEST(Anova, VanishingBeyondInteractionOrder) {
  const std::vector<std::vector<ActivationSpec>> stacks = {
      {kExp}, {kExp, kSquare}, {kSquare, kSquare, kSquare}};
  for (const auto& acts : stacks) {
    for (int n : {2, 3, 6}) {
      const auto spec = build_kernel(acts, n, 3);
      const int K = n == 6 ? 5 : 8;
      const auto table = lambda_table(spec, K);
      EnumerateOptions options;
      options.prune = false;
      options.keep_zeros = true;
      std::size_t checked = 0;
      for (const auto& e : enumerate_spectrum(spec, table, K, options)) {
        if (nonzero_count(e.profile) > spec.d_star) {
          EXPECT_EQ(e.mu, 0.0) << profile_string(e.profile);
          ++checked;
        }
      }
      if (spec.d_star < n) EXPECT_GT(checked, 0u);
    }
  }
}

TEST(Anova, LinearOuterHasNoPairs) {
  const auto spec = build_kernel({kExp}, 2, 3);
  const auto table = lambda_table(spec, 8);
  EnumerateOptions options;
  options.prune = false;
  const auto entries = enumerate_spectrum(spec, table, 8, options);
  for (const auto& e : entries) EXPECT_LE(nonzero_count(e.profile), 1);
  EXPECT_EQ(max_interaction_order(entries), 1);
}

TEST(Enumerate, MultiplicitiesForDegreeOne) {
  const auto spec = build_kernel({kExp, kExp}, 2, 3);
  const auto table = lambda_table(spec, 1);
  const auto entries = enumerate_spectrum(spec, table, 1);
  ASSERT_EQ(entries.size(), 3u);
  std::uint64_t total = 0;
  for (const auto& e : entries) {
    total += e.multiplicity;
    if (e.profile == DegreeProfile{0, 0}) EXPECT_EQ(e.multiplicity, 1u);
    if (e.profile == DegreeProfile{1, 0}) EXPECT_EQ(e.multiplicity, 6u);
    if (e.profile == DegreeProfile{1, 1}) EXPECT_EQ(e.multiplicity, 9u);
  }
  EXPECT_EQ(total, 16u);
}

TEST(Enumerate, MultiplicityFormula) {
  EXPECT_EQ(profile_multiplicity({0, 0, 0}, 3), 1u);
  EXPECT_EQ(profile_multiplicity({2, 1, 0}, 3), 6u * 5u * 3u);
  EXPECT_EQ(profile_multiplicity({2, 2, 0}, 4), 3u * 9u * 9u);
  EXPECT_EQ(profile_multiplicity({3}, 2), 2u);
  for (int d : {2, 3, 5}) {
    for (int k = 0; k <= 8; ++k) {
      EXPECT_EQ(static_cast<double>(profile_multiplicity({k}, d)),
                std::round(oracle::harmonic_dim(k, d)));
    }
  }
}

TEST(Enumerate, SortedWithDeterministicTies) {
  const auto spec = build_kernel({kExp, kSquare}, 3, 3);
  const auto table = lambda_table(spec, 6);
  const auto entries = enumerate_spectrum(spec, table, 6);
  ASSERT_FALSE(entries.empty());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    EXPECT_GE(entries[i].multiplicity, 1u);
    EXPECT_TRUE(std::isfinite(entries[i].mu));
    EXPECT_GT(entries[i].mu, 0.0);
    EXPECT_EQ(entries[i].profile, canonical(entries[i].profile));
    if (i == 0) continue;
    const auto& a = entries[i - 1];
    const auto& b = entries[i];
    ASSERT_GE(a.mu, b.mu);
    if (a.mu == b.mu) {
      const int ta = std::accumulate(a.profile.begin(), a.profile.end(), 0);
      const int tb = std::accumulate(b.profile.begin(), b.profile.end(), 0);
      EXPECT_TRUE(ta < tb || (ta == tb && a.profile < b.profile));
    }
  }
}

TEST(Enumerate, ThreadCountDoesNotChangeResult) {
  const auto spec = build_kernel({kExp, kExp}, 3, 3);
  const auto table = lambda_table(spec, 8);
  EnumerateOptions one;
  EnumerateOptions four;
  four.threads = 4;
  const auto a = enumerate_spectrum(spec, table, 8, one);
  const auto b = enumerate_spectrum(spec, table, 8, four);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].profile, b[i].profile);
    EXPECT_EQ(a[i].mu, b[i].mu);
  }
}

TEST(Counting, Extremes) {
  const auto spec = build_kernel({kExp, kSquare}, 2, 3);
  const auto table = lambda_table(spec, 10);
  const auto entries = enumerate_spectrum(spec, table, 10);
  const double top = entries.front().mu;
  const double bottom = entries.back().mu;
  EXPECT_EQ(counting_function(entries, top * 1.0001), 0u);
  std::uint64_t mass = 0;
  for (const auto& e : entries) mass += e.multiplicity;
  EXPECT_EQ(counting_function(entries, bottom), mass);
  EXPECT_EQ(counting_function(entries, bottom * 0.5), mass);
  EXPECT_EQ(counting_function(entries, top), entries.front().multiplicity);
  std::uint64_t prev = 0;
  for (double lam = top; lam > bottom; lam *= 0.7) {
    const auto n = counting_function(entries, lam);
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(Counting, ExpandSpectrum) {
  const auto spec = build_kernel({kExp, kExp}, 2, 3);
  const auto table = lambda_table(spec, 1);
  const auto entries = enumerate_spectrum(spec, table, 1);
  const auto mu = expand_spectrum(entries, 100);
  ASSERT_EQ(mu.size(), 16u);
  EXPECT_TRUE(std::is_sorted(mu.rbegin(), mu.rend()));
  EXPECT_EQ(expand_spectrum(entries, 5).size(), 5u);
}

TEST(FitDecay, RecoversSyntheticModel) {
  std::vector<double> mu(3000);
  for (std::size_t m = 0; m < mu.size(); ++m) mu[m] = std::exp(-2.0 * std::pow(m, 0.25));
  const auto fit = fit_decay(std::span<const double>(mu));
  EXPECT_NEAR(fit.exponent_p, 4.0, 1e-6);
  EXPECT_NEAR(fit.gamma, 2.0, 1e-6);
  EXPECT_GT(fit.goodness, 1.0 - 1e-12);
}

TEST(FitDecay, RecoversOtherExponents) {
  // Rates keep mu_2000 well above the denormal range.
  for (const auto [p, gamma] : {std::pair{1.0, 0.1}, std::pair{2.0, 0.5}, std::pair{6.0, 0.5}}) {
    std::vector<double> mu(2500);
    for (std::size_t m = 0; m < mu.size(); ++m) {
      mu[m] = 3.0 * std::exp(-gamma * std::pow(m, 1.0 / p));
    }
    const auto fit = fit_decay(std::span<const double>(mu));
    EXPECT_NEAR(fit.exponent_p, p, 1e-6 * p);
    EXPECT_NEAR(fit.gamma, gamma, 1e-6 * gamma);
  }
}

TEST(FitDecay, Errors) {
  const std::vector<double> flat(500, 1.0);
  EXPECT_THROW(fit_decay(std::span<const double>(flat)), Error);
  const std::vector<double> few = {1.0, 0.5, 0.25};
  EXPECT_THROW(fit_decay(std::span<const double>(few)), Error);
  std::vector<double> rising(500);
  std::iota(rising.begin(), rising.end(), 1.0);
  EXPECT_THROW(fit_decay(std::span<const double>(rising)), Error);
  try {
    fit_decay(std::span<const double>(flat));
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::fit);
  }
}

TEST(FitDecay, GeometricTwoPatchSquareOuter) {
  // Geometric f1 keeps log(1/mu) linear in degree, so the counting law is clean.
  const auto spec = build_kernel({ActivationSpec::geometric(0.5), kSquare}, 2, 3);
  const auto table = lambda_table(spec, 40);
  const auto entries = enumerate_spectrum(spec, table, 40);
  const auto fit = fit_decay(std::span<const SpectrumEntry>(entries));
  EXPECT_NEAR(fit.counting_slope, 4.0, 1.0);
  EXPECT_GT(fit.goodness, 0.98);
  RecordProperty("exponent_p", std::to_string(fit.exponent_p));
}

TEST(FitDecay, GeometricCircleAndThreePatchLinear) {
  {
    const auto spec = build_kernel({ActivationSpec::geometric(0.9)}, 1, 2);
    const auto table = lambda_table(spec, 1000);
    const auto entries = enumerate_spectrum(spec, table, 1000);
    const auto fit = fit_decay(std::span<const SpectrumEntry>(entries));
    EXPECT_NEAR(fit.exponent_p, 1.0, 0.25);
    EXPECT_NEAR(fit.counting_slope, 1.0, 0.25);
  }
  {
    const auto spec = build_kernel({ActivationSpec::geometric(0.5)}, 3, 3);
    const auto table = lambda_table(spec, 30);
    const auto entries = enumerate_spectrum(spec, table, 30);
    const auto fit = fit_decay(std::span<const SpectrumEntry>(entries));
    EXPECT_NEAR(fit.exponent_p, 2.0, 0.5);
    EXPECT_NEAR(fit.counting_slope, 2.0, 0.5);
  }
}

TEST(FitDecay, ExpTwoPatchSquareOuter) {
  const auto spec = build_kernel({kExp, kSquare}, 2, 3);
  const auto table = lambda_table(spec, 25);
  const auto entries = enumerate_spectrum(spec, table, 25);
  const auto fit = fit_decay(std::span<const SpectrumEntry>(entries));
  EXPECT_NEAR(fit.exponent_p, 4.0, 1.0);
}

TEST(FitDecay, ExpSinglePatchCircle) {
  const auto spec = build_kernel({kExp, kIdentity}, 1, 2);
  // Degrees past ~140 underflow double precision.
  const auto table = lambda_table(spec, 140);
  const auto entries = enumerate_spectrum(spec, table, 140);
  DecayFitOptions options;
  options.min_points = 100;
  const auto fit = fit_decay(std::span<const SpectrumEntry>(entries), options);
  EXPECT_NEAR(fit.exponent_p, 1.0, 0.25);
}

TEST(Mercer, SinglePatchRelativeError) {
  const auto spec = build_kernel({kExp, kIdentity}, 1, 3);
  const auto table = lambda_table(spec, 20);
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto x = sample_uniform(1, 3, rng);
    const auto y = sample_uniform(1, 3, rng);
    const double direct = eval_kernel(spec, x, y);
    const double spectral = mercer_reconstruct(spec, table, x, y, 20);
    worst = std::max(worst, std::abs(direct - spectral) / std::abs(direct));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Mercer, DiagonalTwoPatch) {
  const auto spec = build_kernel({kExp, kSquare}, 2, 3);
  const auto table = lambda_table(spec, 20);
  const double want = std::pow(2.0 * std::exp(1.0), 2);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto x = sample_uniform(2, 3, seed);
    EXPECT_NEAR(mercer_reconstruct(spec, table, x, x, 20), want, 1e-5 * want);
  }
}

TEST(Mercer, DiagonalTruncationErrorShrinks) {
  const auto spec = build_kernel({kExp, kSquare}, 2, 3);
  const auto table = lambda_table(spec, 20);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto x = sample_uniform(2, 3, seed);
    const double direct = eval_kernel(spec, x, x);
    double prev = HUGE_VAL;
    for (int K = 5; K <= 20; ++K) {
      const double err = std::abs(mercer_reconstruct(spec, table, x, x, K) - direct);
      // Below 1e-10 the calibration factor, not truncation, sets the error.
      if (prev > 1e-10 * direct) EXPECT_LT(err, prev) << "K=" << K;
      prev = err;
    }
  }
}

TEST(Mercer, TruncationEnvelopeShrinks) {
  const auto spec = build_kernel({kExp, kSquare}, 2, 3);
  const auto table = lambda_table(spec, 20);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto x = sample_uniform(2, 3, rng);
    const auto y = sample_uniform(2, 3, rng);
    const double direct = eval_kernel(spec, x, y);
    std::vector<double> err;
    for (int K = 5; K <= 20; ++K) err.push_back(std::abs(mercer_reconstruct(spec, table, x, y, K) - direct));
    // sup over K' >= K of the error.
    for (std::size_t j = err.size() - 1; j-- > 0;) err[j] = std::max(err[j], err[j + 1]);
    EXPECT_LT(err.back(), 1e-9 * eval_kernel(spec, x, x));
    EXPECT_GT(err.front(), err.back());
  }
}

TEST(Mercer, TruncationErrorShrinks) {
  const auto spec = build_kernel({kExp, kSquare}, 2, 3);
  const auto table = lambda_table(spec, 20);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto x = sample_uniform(2, 3, rng);
    const auto y = sample_uniform(2, 3, rng);
    const double direct = eval_kernel(spec, x, y);
    double prev = std::abs(mercer_reconstruct(spec, table, x, y, 5) - direct);
    for (int K = 6; K <= 20; ++K) {
      const double err = std::abs(mercer_reconstruct(spec, table, x, y, K) - direct);
      // Past the rounding floor the comparison says nothing.
      if (prev > 1e-12 * direct) EXPECT_LE(err, prev) << "pair " << i << " K=" << K;
      prev = err;
    }
  }
}

TEST(Mercer, ShapeMismatchThrows) {
  const auto spec = build_kernel({kExp, kSquare}, 2, 3);
  const auto table = lambda_table(spec, 4);
  const auto x = sample_uniform(2, 3, 1u);
  const auto y = sample_uniform(3, 3, 2u);
  EXPECT_THROW(mercer_reconstruct(spec, table, x, y, 4), Error);
}

TEST(Windows, GeometricBounds) {
  const double r = 0.5;
  const auto table = geometric_table(r, 3, 50, 4);
  for (int a = 1; a <= 4; ++a) {
    double upper25 = 0.0, upper50 = 0.0;
    double lower25 = HUGE_VAL, lower50 = HUGE_VAL;
    for (int m = 0; m <= 50; ++m) {
      const double u = table.at(m, a) / (std::pow(m + 1.0, a - 1) * std::pow(r, m));
      const double l = table.at(m, a) / std::pow(r / 4.0, m);
      ASSERT_TRUE(std::isfinite(u) && u > 0.0) << "m=" << m;
      ASSERT_TRUE(std::isfinite(l) && l > 0.0) << "m=" << m;
      upper50 = std::max(upper50, u);
      lower50 = std::min(lower50, l);
      if (m <= 25) {
        upper25 = std::max(upper25, u);
        lower25 = std::min(lower25, l);
      }
    }
    EXPECT_LE(upper50 / upper25, 10.0) << "alpha=" << a;
    EXPECT_LE(lower25 / lower50, 10.0) << "alpha=" << a;
  }
}
