#include "harmonica/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "harmonica/error.hpp"
#include "harmonica/harmonics.hpp"
#include "harmonica/parallel.hpp"

namespace harmonica {
namespace {

using ld = long double;

ld log_add(ld a, ld b) {
  if (a == -std::numeric_limits<ld>::infinity()) return b;
  if (b == -std::numeric_limits<ld>::infinity()) return a;
  const ld hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// kappa from degree-k eigenvalues of f1^alpha, closed form against quadrature.
void calibrate(LambdaTable& table, const CoeffSeries& f1, const LambdaOptions& options) {
  table.kappa = 1.0;
  table.kappa_spread = 0.0;
  table.kappa_samples = 0;
  if (options.kappa_k_max < 0) return;
  const int alpha = std::min(1, table.A_max);
  const int k_hi = std::min(table.K_max, options.kappa_k_max);
  const CoeffSeries g = alpha == 0 ? CoeffSeries::constant(1.0, 0) : f1;
  double scale = 0.0;
  for (int k = 0; k <= k_hi; ++k) scale = std::max(scale, table.at(k, alpha));
  std::vector<double> ratios;
  for (int k = 0; k <= k_hi; ++k) {
    const double formula = table.at(k, alpha);
    if (!(formula > 1e-10 * scale)) continue;
    ratios.push_back(funk_hecke_eigenvalue(g, k, table.d) / formula);
  }
  if (ratios.empty()) return;
  const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) /
                      static_cast<double>(ratios.size());
  double spread = 0.0;
  for (double r : ratios) spread = std::max(spread, std::abs(r / mean - 1.0));
  table.kappa = mean;
  table.kappa_spread = spread;
  table.kappa_samples = static_cast<int>(ratios.size());
}

// Fills the table from f1 at a fixed order. Returns false when some entry of
// an infinite series needs more coefficients.
bool fill_table(LambdaTable& table, const CoeffSeries& f1, bool polynomial, double s_tol) {
  SeriesLimits limits;
  limits.order_cap = std::max(limits.order_cap, f1.order());
  const auto pw = powers(f1, table.A_max, f1.order(), limits);
  table.series_order = f1.order();
  table.lambda.assign(static_cast<std::size_t>(table.K_max) + 1,
                      std::vector<double>(static_cast<std::size_t>(table.A_max) + 1, 0.0));
  table.tail = table.lambda;
  bool ok = true;
  for (int k = 0; k <= table.K_max; ++k) {
    for (int a = 0; a <= table.A_max; ++a) {
      const auto e = lambda_entry(pw[static_cast<std::size_t>(a)], polynomial || a == 0, k,
                                  table.d, s_tol);
      table.lambda[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)] = e.value;
      table.tail[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)] = e.tail;
      ok = ok && e.converged;
    }
  }
  return ok;
}

void check_table_args(int d, int K_max, int A_max, double s_tol) {
  if (d < 2 || K_max < 0 || A_max < 0 || !(s_tol > 0.0 && s_tol < 1.0)) {
    throw Error(ErrorKind::domain, "lambda table needs d >= 2, K_max, A_max >= 0, s_tol in (0,1)");
  }
}

// Shared between mu_eigenvalue and mercer_reconstruct:
// h[k][alpha] = lambda[k][alpha] / alpha!, w[q] = a_q q!.
struct SpectralCoeffs {
  int Q = 0;
  std::vector<std::vector<double>> h;
  std::vector<double> w;

  SpectralCoeffs(const KernelSpec& spec, const LambdaTable& table, int K_max) {
    Q = spec.q_limit();
    if (table.A_max < Q) {
      throw Error(ErrorKind::truncation_cap,
                  "lambda table has A_max = " + std::to_string(table.A_max) +
                      " but the outer series needs alpha up to " + std::to_string(Q));
    }
    if (K_max > table.K_max) {
      throw Error(ErrorKind::truncation_cap, "degree " + std::to_string(K_max) +
                                                 " exceeds the lambda table K_max = " +
                                                 std::to_string(table.K_max));
    }
    h.resize(static_cast<std::size_t>(K_max) + 1);
    for (int k = 0; k <= K_max; ++k) {
      auto& row = h[static_cast<std::size_t>(k)];
      row.resize(static_cast<std::size_t>(Q) + 1);
      double inv_fact = 1.0;
      for (int a = 0; a <= Q; ++a) {
        if (a > 0) inv_fact /= a;
        row[static_cast<std::size_t>(a)] = table.at(k, a) * inv_fact;
      }
    }
    w.resize(static_cast<std::size_t>(Q) + 1);
    double fact = 1.0;
    for (int q = 0; q <= Q; ++q) {
      if (q > 0) fact *= q;
      w[static_cast<std::size_t>(q)] = spec.g[q] * fact;
    }
  }

  // Truncated product of polynomials of degree Q.
  void multiply(std::vector<double>& acc, const std::vector<double>& f) const {
    std::vector<double> out(acc.size(), 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      if (acc[i] == 0.0) continue;
      for (std::size_t j = 0; i + j < acc.size(); ++j) out[i + j] += acc[i] * f[j];
    }
    acc.swap(out);
  }

  double contract(const std::vector<double>& p) const {
    double mu = 0.0;
    for (std::size_t q = 0; q < p.size(); ++q) mu += w[q] * p[q];
    return mu;
  }

  double mu(const DegreeProfile& profile) const {
    std::vector<double> p(static_cast<std::size_t>(Q) + 1, 0.0);
    p[0] = 1.0;
    for (int k : profile) {
      if (k < 0 || static_cast<std::size_t>(k) >= h.size()) {
        throw Error(ErrorKind::truncation_cap, "profile degree " + std::to_string(k) +
                                                   " outside the lambda table");
      }
      multiply(p, h[static_cast<std::size_t>(k)]);
    }
    return contract(p);
  }
};

struct Plateau {
  std::size_t first = 0;
  std::size_t last = 0;
  double mu = 0.0;
};

double regression_slope(const std::vector<double>& x, const std::vector<double>& y,
                        double* intercept = nullptr, double* sse = nullptr) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double b = my - slope * mx;
  if (intercept) *intercept = b;
  if (sse) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (b + slope * x[i]);
      s += r * r;
    }
    *sse = s;
  }
  return slope;
}

DecayFit fit_plateaus(const std::vector<Plateau>& plateaus, std::size_t positive,
                      const DecayFitOptions& options) {
  if (positive < options.min_points) {
    throw Error(ErrorKind::fit, "decay fit needs at least " + std::to_string(options.min_points) +
                                    " positive eigenvalues, got " + std::to_string(positive));
  }
  if (plateaus.size() < 2) throw Error(ErrorKind::fit, "flat spectrum: all eigenvalues equal");
  const double mu0 = plateaus.front().mu;
  std::vector<double> ranks;
  std::vector<double> logs;
  std::vector<double> cx;
  std::vector<double> cy;
  for (const auto& p : plateaus) {
    if (p.first < options.rank_lo || p.first > options.rank_hi || !(p.mu > 0.0)) continue;
    ranks.push_back(static_cast<double>(p.first));
    logs.push_back(std::log(p.mu));
    if (p.mu < mu0) {
      cx.push_back(std::log(std::log(mu0 / p.mu)));
      cy.push_back(std::log(static_cast<double>(p.last + 1)));
    }
  }
  if (ranks.size() < 3) {
    throw Error(ErrorKind::fit, "decay fit window holds fewer than 3 distinct eigenvalues");
  }
  const double ymean = std::accumulate(logs.begin(), logs.end(), 0.0) /
                       static_cast<double>(logs.size());
  double sst = 0.0;
  for (double y : logs) sst += (y - ymean) * (y - ymean);
  if (!(sst > 0.0)) throw Error(ErrorKind::fit, "flat spectrum: all eigenvalues equal");

  auto sse_at = [&](double log_p) {
    const double p = std::exp(log_p);
    std::vector<double> x(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) x[i] = std::pow(ranks[i], 1.0 / p);
    double sse = 0.0;
    regression_slope(x, logs, nullptr, &sse);
    return sse;
  };
  const double lo = std::log(options.p_min);
  const double hi = std::log(options.p_max);
  const int grid = std::max(options.grid, 3);
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double v = sse_at(lo + (hi - lo) * i / (grid - 1));
    if (v < best_sse) {
      best_sse = v;
      best = i;
    }
  }
  const double step = (hi - lo) / (grid - 1);
  const double a = lo + step * std::max(best - 1, 0);
  const double b = lo + step * std::min(best + 1, grid - 1);
  const auto [log_p, sse] =
      boost::math::tools::brent_find_minima(sse_at, a, b, std::numeric_limits<double>::digits / 2);

  DecayFit fit;
  fit.exponent_p = std::exp(log_p);
  std::vector<double> x(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) x[i] = std::pow(ranks[i], 1.0 / fit.exponent_p);
  fit.gamma = -regression_slope(x, logs, &fit.intercept);
  fit.goodness = 1.0 - sse / sst;
  fit.points = ranks.size();
  if (cx.size() >= 2) fit.counting_slope = regression_slope(cx, cy);
  return fit;
}

void append_plateau(std::vector<Plateau>& out, std::size_t first, std::size_t count, double mu) {
  if (!out.empty() && out.back().mu == mu) {
    out.back().last = first + count - 1;
  } else {
    out.push_back({first, first + count - 1, mu});
  }
}

}  // namespace

LambdaEntry lambda_entry(const CoeffSeries& f1_power, bool exact_polynomial, int k, int d,
                         double s_tol) {
  if (k < 0 || d < 2) throw Error(ErrorKind::domain, "lambda entry needs k >= 0 and d >= 2");
  constexpr ld neg_inf = -std::numeric_limits<ld>::infinity();
  const ld half_d = static_cast<ld>(d) / 2;
  const ld log_tol = std::log(static_cast<ld>(s_tol));
  ld partial = neg_inf;
  ld prev = neg_inf;
  ld last = neg_inf;
  bool have_prev = false;
  bool stopped = false;
  for (int s = 0; 2 * s + k <= f1_power.order(); ++s) {
    const double b = f1_power[2 * s + k];
    if (b == 0.0) continue;
    const ld term = std::log(static_cast<ld>(b)) + std::lgamma(static_cast<ld>(2 * s + k + 1)) -
                    std::lgamma(static_cast<ld>(2 * s + 1)) +
                    std::lgamma(static_cast<ld>(s) + 0.5L) -
                    std::lgamma(static_cast<ld>(s + k) + half_d);
    partial = log_add(partial, term);
    last = term;
    if (have_prev && term < prev && term < log_tol + partial) {
      stopped = true;
      break;
    }
    prev = term;
    have_prev = true;
  }
  LambdaEntry e;
  e.converged = stopped || exact_polynomial;
  if (partial == neg_inf) return e;
  const ld prefactor = std::log(sphere_surface_ld(d - 1)) +
                       std::lgamma((static_cast<ld>(d) - 1) / 2) -
                       static_cast<ld>(k + 1) * std::log(2.0L);
  e.value = static_cast<double>(std::exp(prefactor + partial));
  e.tail = static_cast<double>(std::exp(last - partial));
  return e;
}

LambdaTable lambda_table(const CoeffSeries& f1, int d, int K_max, int A_max, double s_tol,
                         const LambdaOptions& options) {
  check_table_args(d, K_max, A_max, s_tol);
  LambdaTable table;
  table.d = d;
  table.K_max = K_max;
  table.A_max = A_max;
  // A truncated series is a polynomial; its powers are exact at order A * deg.
  const int deg = f1.degree().value_or(0);
  const CoeffSeries exact = f1.truncated(std::max({A_max * deg, K_max, 1}));
  fill_table(table, exact, true, s_tol);
  calibrate(table, exact, options);
  return table;
}

LambdaTable lambda_table(const std::function<CoeffSeries(int)>& f1_source, int d, int K_max,
                         int A_max, double s_tol, const LambdaOptions& options) {
  check_table_args(d, K_max, A_max, s_tol);
  LambdaTable table;
  table.d = d;
  table.K_max = K_max;
  table.A_max = A_max;
  int order = K_max + options.initial_margin;
  while (true) {
    const CoeffSeries f1 = f1_source(order);
    if (fill_table(table, f1, false, s_tol)) {
      calibrate(table, f1, options);
      return table;
    }
    if (order >= options.order_cap) {
      throw Error(ErrorKind::convergence,
                  "eigenvalue s-series did not converge by series order " + std::to_string(order));
    }
    order = std::min(order * 2, options.order_cap);
  }
}

LambdaTable lambda_table(const KernelSpec& spec, int K_max, const LambdaOptions& options) {
  const int A = spec.q_limit();
  const auto& first = spec.layers.front();
  if (first.polynomial_degree()) {
    return lambda_table(majorant_series(first, *first.polynomial_degree()), spec.d, K_max, A,
                        spec.truncation.s_tol, options);
  }
  return lambda_table([&spec](int order) { return spec.f1_series(order); }, spec.d, K_max, A,
                      spec.truncation.s_tol, options);
}

DegreeProfile canonical(DegreeProfile profile) {
  std::sort(profile.begin(), profile.end(), std::greater<>());
  return profile;
}

int nonzero_count(const DegreeProfile& profile) {
  return static_cast<int>(std::count_if(profile.begin(), profile.end(), [](int k) { return k != 0; }));
}

std::string profile_string(const DegreeProfile& profile) {
  std::string out;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(profile[i]);
  }
  return out;
}

double mu_eigenvalue(const KernelSpec& spec, const DegreeProfile& profile,
                     const LambdaTable& table) {
  if (static_cast<int>(profile.size()) != spec.n) {
    throw Error(ErrorKind::structural, "profile length must equal the patch count");
  }
  const int k_hi = profile.empty() ? 0 : *std::max_element(profile.begin(), profile.end());
  return SpectralCoeffs(spec, table, k_hi).mu(profile);
}

std::uint64_t profile_multiplicity(const DegreeProfile& profile, int d) {
  __extension__ using u128 = unsigned __int128;
  constexpr u128 cap = std::numeric_limits<std::uint64_t>::max();
  std::map<int, int> counts;
  for (int k : profile) ++counts[k];
  // Multinomial n! / prod c_v!, built as a product of binomials.
  u128 arrangements = 1;
  int placed = 0;
  for (const auto& [k, c] : counts) {
    for (int i = 1; i <= c; ++i) {
      arrangements = arrangements * static_cast<u128>(placed + i) / static_cast<u128>(i);
      if (arrangements > cap) throw Error(ErrorKind::domain, "multiplicity overflows 64 bits");
    }
    placed += c;
  }
  u128 total = arrangements;
  for (int k : profile) {
    total *= harmonic_dim(k, d);
    if (total > cap) throw Error(ErrorKind::domain, "multiplicity overflows 64 bits");
  }
  return static_cast<std::uint64_t>(total);
}

std::vector<SpectrumEntry> enumerate_spectrum(const KernelSpec& spec, const LambdaTable& table,
                                              int K_max, const EnumerateOptions& options) {
  const SpectralCoeffs coeffs(spec, table, K_max);
  const int cap = options.prune ? std::min(spec.d_star, spec.n) : spec.n;

  std::vector<SpectrumEntry> entries;
  DegreeProfile current;
  // Non-increasing nonzero prefixes of length <= cap, padded with zeros.
  auto recurse = [&](auto&& self, int max_value) -> void {
    DegreeProfile p = current;
    p.resize(static_cast<std::size_t>(spec.n), 0);
    entries.push_back({std::move(p), 0.0, 0});
    if (static_cast<int>(current.size()) == cap) return;
    for (int k = 1; k <= max_value; ++k) {
      current.push_back(k);
      self(self, k);
      current.pop_back();
    }
  };
  recurse(recurse, K_max);

  parallel_for(0, entries.size(), options.threads, [&](std::size_t i) {
    entries[i].mu = coeffs.mu(entries[i].profile);
    entries[i].multiplicity = profile_multiplicity(entries[i].profile, spec.d);
  });

  if (!options.keep_zeros) {
    std::erase_if(entries, [](const SpectrumEntry& e) { return e.mu == 0.0; });
  }
  std::sort(entries.begin(), entries.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    if (a.mu != b.mu) return a.mu > b.mu;
    const int ta = std::accumulate(a.profile.begin(), a.profile.end(), 0);
    const int tb = std::accumulate(b.profile.begin(), b.profile.end(), 0);
    if (ta != tb) return ta < tb;
    return a.profile < b.profile;
  });
  return entries;
}

std::uint64_t counting_function(std::span<const SpectrumEntry> spectrum, double lam) {
  std::uint64_t count = 0;
  for (const auto& e : spectrum) {
    if (e.mu >= lam) count += e.multiplicity;
  }
  return count;
}

std::vector<double> expand_spectrum(std::span<const SpectrumEntry> spectrum, std::size_t limit) {
  std::vector<double> out;
  for (const auto& e : spectrum) {
    for (std::uint64_t i = 0; i < e.multiplicity && out.size() < limit; ++i) out.push_back(e.mu);
    if (out.size() >= limit) break;
  }
  return out;
}

DecayFit fit_decay(std::span<const double> mu, const DecayFitOptions& options) {
  std::vector<Plateau> plateaus;
  std::size_t positive = 0;
  for (std::size_t m = 0; m < mu.size(); ++m) {
    if (m > 0 && mu[m] > mu[m - 1]) {
      throw Error(ErrorKind::fit, "decay fit needs a non-increasing sequence");
    }
    if (mu[m] > 0.0) ++positive;
    append_plateau(plateaus, m, 1, mu[m]);
  }
  return fit_plateaus(plateaus, positive, options);
}

DecayFit fit_decay(std::span<const SpectrumEntry> spectrum, const DecayFitOptions& options) {
  std::vector<Plateau> plateaus;
  std::size_t rank = 0;
  std::size_t positive = 0;
  for (const auto& e : spectrum) {
    if (e.multiplicity == 0) continue;
    if (e.mu > 0.0) positive += e.multiplicity;
    append_plateau(plateaus, rank, e.multiplicity, e.mu);
    rank += e.multiplicity;
  }
  return fit_plateaus(plateaus, positive, options);
}

double mercer_reconstruct(const KernelSpec& spec, const LambdaTable& table,
                          const PatchedImage& x, const PatchedImage& y, int K_max) {
  if (x.count() != spec.n || y.count() != spec.n || x.dim() != spec.d || y.dim() != spec.d) {
    throw Error(ErrorKind::structural, "inputs do not match the kernel's patch layout");
  }
  const SpectralCoeffs coeffs(spec, table, K_max);
  const auto width = static_cast<std::size_t>(coeffs.Q) + 1;
  std::vector<double> p(width, 0.0);
  p[0] = 1.0;
  for (int i = 0; i < spec.n; ++i) {
    const double t = std::clamp(x.patch(i).dot(y.patch(i)), -1.0, 1.0);
    const auto z = zonal_pair_sums(K_max, spec.d, t);
    std::vector<double> H(width, 0.0);
    for (int k = 0; k <= K_max; ++k) {
      const auto& h = coeffs.h[static_cast<std::size_t>(k)];
      const double zk = z[static_cast<std::size_t>(k)];
      for (std::size_t a = 0; a < width; ++a) H[a] += zk * h[a];
    }
    coeffs.multiply(p, H);
  }
  return std::pow(table.kappa, spec.n) * coeffs.contract(p);
}

int max_interaction_order(std::span<const SpectrumEntry> spectrum) {
  int best = 0;
  for (const auto& e : spectrum) {
    if (e.mu > 0.0) best = std::max(best, nonzero_count(e.profile));
  }
  return best;
}

}  // namespace harmonica
