#include "harmonica/krr.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "harmonica/error.hpp"
#include "harmonica/harmonics.hpp"
#include "harmonica/parallel.hpp"

namespace harmonica {

void Dataset::validate() const {
  if (xs.empty()) throw Error(ErrorKind::validation, "dataset is empty");
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::structural, "dataset has " + std::to_string(xs.size()) +
                                           " inputs but " + std::to_string(ys.size()) + " labels");
  }
  for (double y : ys) {
    if (!std::isfinite(y)) throw Error(ErrorKind::validation, "labels must be finite");
  }
}

FitResult rls_fit(const Eigen::MatrixXd& G, const Dataset& data, double lambda) {
  data.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::domain, "regularization lambda must be positive");
  }
  const auto ell = static_cast<Eigen::Index>(data.size());
  if (G.rows() != ell || G.cols() != ell) {
    throw Error(ErrorKind::structural, "Gram matrix does not match the dataset");
  }
  const Eigen::Map<const Eigen::VectorXd> y(data.ys.data(), ell);
  Eigen::MatrixXd A = G;
  A.diagonal().array() += lambda * static_cast<double>(ell);

  FitResult fit;
  fit.lambda = lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    fit.jitter = 1e-12 * G.trace() / static_cast<double>(ell);
    A.diagonal().array() += fit.jitter;
    llt.compute(A);
    if (llt.info() != Eigen::Success) {
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                     A, Eigen::EigenvaluesOnly)
                                     .eigenvalues();
      const double cond = std::abs(ev.maxCoeff()) / std::max(std::abs(ev.minCoeff()), 1e-300);
      throw Error(ErrorKind::solver,
                  "RLS system is not numerically positive definite (condition estimate " +
                      std::to_string(cond) + ")");
    }
  }
  fit.coeffs = llt.solve(y);
  fit.xs = data.xs;
  fit.train_mse = (G * fit.coeffs - y).squaredNorm() / static_cast<double>(ell);
  return fit;
}

FitResult rls_fit(const KernelSpec& spec, const Dataset& data, double lambda, unsigned threads) {
  data.validate();
  return rls_fit(gram(spec, data.xs, threads), data, lambda);
}

double predict(const KernelSpec& spec, const FitResult& fit, const PatchedImage& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < fit.xs.size(); ++i) {
    acc += fit.coeffs(static_cast<Eigen::Index>(i)) * eval_kernel(spec, x, fit.xs[i]);
  }
  return acc;
}

Eigen::VectorXd predict(const KernelSpec& spec, const FitResult& fit,
                        const std::vector<PatchedImage>& xs, unsigned threads) {
  return cross_gram(spec, xs, fit.xs, threads) * fit.coeffs;
}

Regime Schedule::regime() const {
  if (beta > 1.0) return Regime::above_one;
  if (beta == 1.0) return Regime::one;
  return Regime::below_one;
}

void Schedule::validate(int d, int d_star) const {
  if (!(beta > 0.0 && beta <= 2.0)) {
    throw Error(ErrorKind::validation, "schedule beta must lie in (0, 2]");
  }
  if (regime() == Regime::one && !(mu_exp > static_cast<double>((d - 1) * d_star))) {
    throw Error(ErrorKind::validation, "beta = 1 needs mu_exp > (d - 1) d* = " +
                                           std::to_string((d - 1) * d_star));
  }
}

double schedule_lambda(const Schedule& s, int ell, int d, int d_star) {
  if (ell < 3) throw Error(ErrorKind::domain, "schedules need ell >= 3");
  s.validate(d, d_star);
  const double l = ell;
  switch (s.regime()) {
    case Regime::above_one:
      return std::pow(l, -1.0 / s.beta);
    case Regime::one:
      return std::pow(std::log(l), s.mu_exp) / l;
    case Regime::below_one:
      return std::pow(std::log(l), static_cast<double>((d - 1) * d_star) / s.beta) / l;
  }
  return 0.0;
}

std::vector<double> nystrom_eigs(const KernelSpec& spec, int ell, int top_k, std::uint64_t seed,
                                 unsigned threads) {
  if (top_k < 1 || ell < top_k) throw Error(ErrorKind::domain, "nystrom needs 1 <= top_k <= ell");
  std::mt19937_64 rng(seed);
  const auto xs = sample_uniform_batch(static_cast<std::size_t>(ell), spec.n, spec.d, rng);
  const Eigen::MatrixXd G = gram(spec, xs, threads);
  Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues();
  const double scale = std::pow(sphere_surface(spec.d), spec.n) / static_cast<double>(ell);
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  out.resize(static_cast<std::size_t>(top_k));
  for (double& v : out) v *= scale;
  return out;
}

std::size_t cluster_cover(std::span<const SpectrumEntry> spectrum, std::size_t top_k) {
  std::size_t rank = 0;
  for (const auto& e : spectrum) {
    if (rank >= top_k) break;
    rank += e.multiplicity;
  }
  return std::max(rank, top_k);
}

std::vector<NystromRow> compare_nystrom(std::span<const double> nystrom,
                                        std::span<const SpectrumEntry> spectrum, double scale,
                                        std::size_t top_k) {
  std::vector<NystromRow> rows;
  std::size_t start = 0;
  for (const auto& e : spectrum) {
    if (start >= top_k) break;
    const std::size_t end = start + e.multiplicity;
    const double closed = scale * e.mu;
    double cluster = 0.0;
    std::size_t have = 0;
    for (std::size_t r = start; r < end && r < nystrom.size(); ++r, ++have) cluster += nystrom[r];
    cluster = have ? cluster / static_cast<double>(have) : 0.0;
    for (std::size_t r = start; r < end && r < top_k; ++r) {
      NystromRow row;
      row.rank = r + 1;
      row.nystrom = r < nystrom.size() ? nystrom[r] : 0.0;
      row.closed_form = closed;
      row.rel_err = std::abs(row.nystrom - closed) / closed;
      row.cluster_nystrom = cluster;
      row.cluster_rel_err = std::abs(cluster - closed) / closed;
      rows.push_back(row);
    }
    start = end;
  }
  return rows;
}

std::string_view to_string(TargetKind kind) noexcept {
  switch (kind) {
    case TargetKind::zero: return "zero";
    case TargetKind::zonal: return "zonal";
    case TargetKind::kernel_sections: return "kernel_sections";
    case TargetKind::source: return "source";
    case TargetKind::cnn: return "cnn";
  }
  return "unknown";
}

TargetKind parse_target_kind(std::string_view name) {
  if (name == "zero") return TargetKind::zero;
  if (name == "zonal") return TargetKind::zonal;
  if (name == "kernel_sections") return TargetKind::kernel_sections;
  if (name == "source") return TargetKind::source;
  if (name == "cnn") return TargetKind::cnn;
  throw Error(ErrorKind::validation, "unknown target kind '" + std::string(name) + "'");
}

TargetFn make_target(const KernelSpec& spec, const TargetConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (cfg.kind) {
    case TargetKind::zero:
      return [](const PatchedImage&) { return 0.0; };

    case TargetKind::zonal: {
      if (cfg.degree < 0) throw Error(ErrorKind::validation, "zonal degree must be >= 0");
      const Eigen::VectorXd anchor = sample_uniform(1, spec.d, rng).patch(0);
      const int k = cfg.degree;
      const int d = spec.d;
      return [anchor, k, d](const PatchedImage& x) {
        return zonal_poly(k, d, std::clamp(x.patch(0).dot(anchor), -1.0, 1.0));
      };
    }

    case TargetKind::kernel_sections: {
      if (cfg.count < 1) throw Error(ErrorKind::validation, "target needs count >= 1");
      auto anchors = sample_uniform_batch(static_cast<std::size_t>(cfg.count), spec.n, spec.d, rng);
      std::vector<double> c(anchors.size());
      for (double& v : c) v = normal(rng) / std::sqrt(static_cast<double>(cfg.count));
      return [spec, anchors = std::move(anchors), c = std::move(c)](const PatchedImage& x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < anchors.size(); ++j) acc += c[j] * eval_kernel(spec, x, anchors[j]);
        return acc;
      };
    }

    case TargetKind::source: {
      if (cfg.count < 1 || cfg.K_max < 0 || !(cfg.beta > 0.0)) {
        throw Error(ErrorKind::validation, "source target needs count >= 1, K_max >= 0, beta > 0");
      }
      const auto table = lambda_table(spec, cfg.K_max);
      const auto entries = enumerate_spectrum(spec, table, cfg.K_max);
      const double scale = std::pow(table.kappa, spec.n);
      // Every arrangement of every profile with weight (kappa^n mu)^{beta/2}.
      std::vector<std::pair<DegreeProfile, double>> terms;
      for (const auto& e : entries) {
        DegreeProfile p = e.profile;
        std::sort(p.begin(), p.end());
        const double w = std::pow(scale * e.mu, cfg.beta / 2.0);
        do {
          terms.emplace_back(p, w);
        } while (std::next_permutation(p.begin(), p.end()));
      }
      auto anchors = sample_uniform_batch(static_cast<std::size_t>(cfg.count), spec.n, spec.d, rng);
      std::vector<double> c(anchors.size());
      for (double& v : c) v = normal(rng) / std::sqrt(static_cast<double>(cfg.count));
      const int K = cfg.K_max;
      const int n = spec.n;
      const int d = spec.d;
      return [terms = std::move(terms), anchors = std::move(anchors), c = std::move(c), K, n,
              d](const PatchedImage& x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < anchors.size(); ++j) {
          std::vector<std::vector<double>> z(static_cast<std::size_t>(n));
          for (int i = 0; i < n; ++i) {
            z[static_cast<std::size_t>(i)] = zonal_pair_sums(
                K, d, std::clamp(x.patch(i).dot(anchors[j].patch(i)), -1.0, 1.0));
          }
          double f = 0.0;
          for (const auto& [p, w] : terms) {
            double prod = w;
            for (int i = 0; i < n; ++i) {
              prod *= z[static_cast<std::size_t>(i)][static_cast<std::size_t>(p[static_cast<std::size_t>(i)])];
            }
            f += prod;
          }
          acc += c[j] * f;
        }
        return acc;
      };
    }

    case TargetKind::cnn: {
      const auto shapes = layer_chain(spec.n, spec.d, static_cast<int>(spec.layers.size()),
                                      cfg.filters, cfg.patch_sizes, cfg.boundary);
      auto params = random_params(shapes, seed, cfg.pooling, cfg.pooling_width, cfg.boundary);
      return [params = std::move(params), acts = spec.layers](const PatchedImage& x) {
        return forward(params, acts, x);
      };
    }
  }
  throw Error(ErrorKind::validation, "unknown target kind");
}

std::vector<LearningPoint> learning_curve(const KernelSpec& spec, const TargetFn& target,
                                          const Schedule& schedule, std::span<const int> sizes,
                                          int test_size, std::uint64_t seed, double noise,
                                          unsigned threads) {
  if (test_size < 1) throw Error(ErrorKind::validation, "test_size must be >= 1");
  if (!(noise >= 0.0)) throw Error(ErrorKind::validation, "noise must be >= 0");
  std::vector<LearningPoint> out;
  for (int ell : sizes) {
    const double lambda = schedule_lambda(schedule, ell, spec.d, spec.d_star);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(ell)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset train;
    train.xs = sample_uniform_batch(static_cast<std::size_t>(ell), spec.n, spec.d, rng);
    for (const auto& x : train.xs) train.ys.push_back(target(x) + noise * normal(rng));
    const auto test = sample_uniform_batch(static_cast<std::size_t>(test_size), spec.n, spec.d, rng);

    const auto fit = rls_fit(spec, train, lambda, threads);
    const Eigen::VectorXd pred = predict(spec, fit, test, threads);
    double mse = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const double r = pred(static_cast<Eigen::Index>(i)) - target(test[i]);
      mse += r * r;
    }
    out.push_back({ell, lambda, fit.train_mse, mse / static_cast<double>(test.size()), seed});
  }
  return out;
}

}  // namespace harmonica
