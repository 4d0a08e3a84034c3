#include "harmonica_cli/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "harmonica/config.hpp"
#include "harmonica/error.hpp"
#include "harmonica/parallel.hpp"

namespace harmonica::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<int> kmax;
  std::optional<double> tolerance;
  std::vector<std::string> images;
  std::optional<int> patch_side;
  std::optional<int> stride;
  std::optional<std::string> locations;
};

struct Run {
  std::string command;
  RunConfig cfg;
  std::string hash;
  std::optional<int> kmax;
  std::optional<double> tolerance;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("harmonica");
    l->set_pattern("[%l] %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("HARMONICA_LOG")) level = spdlog::level::from_str(env);
    l->set_level(level);
    return l;
  }();
  return log;
}

// "row,col;row,col;..."
std::vector<PatchLocation> parse_locations(const std::string& text) {
  std::vector<PatchLocation> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    PatchLocation loc;
    char comma = 0;
    std::istringstream is(item);
    if (!(is >> loc.row >> comma >> loc.col) || comma != ',' || loc.row < 1 || loc.col < 1 ||
        !(is >> std::ws).eof()) {
      throw Error(ErrorKind::validation, "--locations expects 'row,col;row,col;...' with entries >= 1");
    }
    out.push_back(loc);
  }
  if (out.empty()) throw Error(ErrorKind::validation, "--locations is empty");
  return out;
}

// Image inputs from flags; config paths are taken relative to the config file.
void apply_image_flags(const Flags& flags, const fs::path& config_dir, RunConfig& cfg) {
  auto& cl = cfg.cnn_label;
  for (auto& p : cl.images) {
    if (fs::path(p).is_relative()) p = (config_dir / p).string();
  }
  if (!flags.images.empty()) cl.images = flags.images;
  if (flags.patch_side) cl.patch_side = *flags.patch_side;
  if (flags.stride) {
    cl.stride = *flags.stride;
    cl.locations.clear();
  }
  if (flags.locations) {
    cl.locations = parse_locations(*flags.locations);
    cl.stride = 0;
  }
  if (flags.stride && flags.locations) {
    throw Error(ErrorKind::validation, "give either --stride or --locations, not both");
  }
  if (cl.images.empty()) return;
  if (cl.patch_side < 1 || (cl.stride < 1 && cl.locations.empty())) {
    throw Error(ErrorKind::validation,
                "image inputs need a patch side and either a stride or a location list");
  }
  if (cl.patch_side * cl.patch_side != cfg.d) {
    throw Error(ErrorKind::validation,
                fmt::format("patch side {} gives dimension {}, config has d = {}", cl.patch_side,
                            cl.patch_side * cl.patch_side, cfg.d));
  }
  if (!cl.locations.empty() && static_cast<int>(cl.locations.size()) != cfg.n) {
    throw Error(ErrorKind::validation,
                fmt::format("{} locations given, config has n = {}", cl.locations.size(), cfg.n));
  }
}

// Flags override the file; the hash covers everything that can change output.
Run prepare(const std::string& command, const char* section, const char* kmax_key,
            const Flags& flags) {
  Run run;
  run.command = command;
  run.cfg = load_run_config(flags.config);
  auto& cfg = run.cfg;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.threads) cfg.threads = std::max(1u, *flags.threads);
  if (flags.out) cfg.out = *flags.out;
  if (cfg.out.empty()) {
    throw Error(ErrorKind::validation, "no output path: set 'out' in the config or pass --out");
  }
  run.kmax = flags.kmax;
  run.tolerance = flags.tolerance;
  if (run.kmax && *run.kmax < 0) throw Error(ErrorKind::validation, "--kmax must be >= 0");
  if (run.tolerance && !(*run.tolerance > 0)) {
    throw Error(ErrorKind::validation, "--tolerance must be positive");
  }

  apply_image_flags(flags, fs::path(flags.config).parent_path(), cfg);

  json hashed = cfg.raw;
  hashed.erase("out");
  hashed.erase("threads");
  hashed["seed"] = cfg.seed;
  if (run.kmax && kmax_key) hashed[section][kmax_key] = *run.kmax;
  if (run.tolerance) hashed[section]["tolerance"] = *run.tolerance;
  if (!flags.images.empty()) hashed["cnn_label"]["images"] = flags.images;
  if (flags.patch_side) hashed["cnn_label"]["patch_side"] = *flags.patch_side;
  if (flags.stride) {
    hashed["cnn_label"]["stride"] = *flags.stride;
    hashed["cnn_label"].erase("locations");
  }
  if (flags.locations) {
    json locs = json::array();
    for (const auto& l : cfg.cnn_label.locations) locs.push_back({l.row, l.col});
    hashed["cnn_label"]["locations"] = locs;
    hashed["cnn_label"].erase("stride");
  }
  run.hash = config_hash(hashed);
  logger()->info("{}: config {} hash {} seed {}", command, flags.config, run.hash, cfg.seed);
  return run;
}

std::string csv_header(const Run& run, const char* columns) {
  return fmt::format("# harmonica {}\n# command: {}\n# config_hash: {}\n# seed: {}\n{}\n",
                     kVersion, run.command, run.hash, run.cfg.seed, columns);
}

json json_header(const Run& run) {
  return {{"harmonica_version", kVersion},
          {"command", run.command},
          {"config_hash", run.hash},
          {"seed", run.cfg.seed}};
}

fs::path sidecar(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  if (p.has_extension()) return p.replace_extension(suffix);
  p += suffix;
  return p;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::io, "write failed for " + path.string());
  logger()->info("wrote {}", path.string());
}

int cmd_spectrum(const Flags& flags) {
  const Run run = prepare("spectrum", "spectrum", "K_max", flags);
  const auto& cfg = run.cfg;
  const int K = run.kmax.value_or(cfg.spectrum.K_max);
  const auto spec = kernel_from_config(cfg);
  const auto table = lambda_table(spec, K);
  const auto entries =
      enumerate_spectrum(spec, table, K, {cfg.spectrum.prune, false, cfg.threads});
  const double scale = std::pow(table.kappa, cfg.n);

  std::string csv = csv_header(run, "rank,mu,multiplicity,profile");
  std::uint64_t rank = 1;
  for (const auto& e : entries) {
    csv += fmt::format("{},{},{},{}\n", rank, num(scale * e.mu), e.multiplicity,
                       profile_string(e.profile));
    rank += e.multiplicity;
  }

  json summary = json_header(run);
  summary["kappa"] = table.kappa;
  summary["kappa_spread"] = table.kappa_spread;
  summary["entries"] = entries.size();
  summary["eigenvalues"] = rank - 1;
  summary["K_max"] = K;
  summary["d_star"] = spec.d_star;
  summary["D"] = spec.D ? json(*spec.D) : json(nullptr);
  summary["max_interaction_order"] = max_interaction_order(entries);
  try {
    const auto fit = fit_decay(entries, cfg.spectrum.fit);
    summary["p"] = fit.exponent_p;
    summary["gamma"] = fit.gamma;
    summary["goodness"] = fit.goodness;
    summary["counting_slope"] = fit.counting_slope;
    summary["fit_points"] = fit.points;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::fit) throw;
    logger()->warn("decay fit skipped: {}", e.what());
    summary["p"] = nullptr;
    summary["gamma"] = nullptr;
    summary["counting_slope"] = nullptr;
    summary["fit_error"] = e.what();
  }

  write_file(cfg.out, csv);
  write_file(sidecar(cfg.out, ".summary.json"), summary.dump(2) + "\n");
  return ok;
}

int cmd_reconstruct(const Flags& flags) {
  const Run run = prepare("reconstruct", "reconstruct", "K_max", flags);
  const auto& cfg = run.cfg;
  const int K = run.kmax.value_or(cfg.reconstruct.K_max);
  const double tol = run.tolerance.value_or(cfg.reconstruct.tolerance);
  const auto spec = kernel_from_config(cfg);
  const auto table = lambda_table(spec, K);

  std::mt19937_64 rng(cfg.seed);
  const auto pairs = static_cast<std::size_t>(cfg.reconstruct.pairs);
  std::vector<PatchedImage> xs, ys;
  for (std::size_t i = 0; i < pairs; ++i) {
    xs.push_back(sample_uniform(cfg.n, cfg.d, rng));
    ys.push_back(sample_uniform(cfg.n, cfg.d, rng));
  }
  std::vector<double> direct(pairs), spectral(pairs), diag(pairs);
  parallel_for(0, pairs, cfg.threads, [&](std::size_t i) {
    direct[i] = eval_kernel(spec, xs[i], ys[i]);
    spectral[i] = mercer_reconstruct(spec, table, xs[i], ys[i], K);
    diag[i] = eval_kernel(spec, xs[i], xs[i]);
  });

  std::string csv = csv_header(run, "pair_id,direct,spectral,abs_err,rel_err");
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double abs_err = std::abs(direct[i] - spectral[i]);
    const double rel_err = abs_err / diag[i];
    worst = std::max(worst, rel_err);
    csv += fmt::format("{},{},{},{},{}\n", i, num(direct[i]), num(spectral[i]), num(abs_err),
                       num(rel_err));
  }
  write_file(cfg.out, csv);
  if (!(worst <= tol)) {
    logger()->error("max relative error {} exceeds tolerance {}", worst, tol);
    return tolerance;
  }
  return ok;
}

int cmd_learning_curve(const Flags& flags) {
  const Run run = prepare("learning-curve", "learning_curve", nullptr, flags);
  const auto& cfg = run.cfg;
  const auto& lc = cfg.learning_curve;
  const auto spec = kernel_from_config(cfg);

  std::string csv = csv_header(run, "ell,lambda,train_mse,test_mse,seed");
  for (int r = 0; r < lc.repeats; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    const auto target = make_target(spec, lc.target, seed);
    const auto points = learning_curve(spec, target, lc.schedule, lc.sizes, lc.test_size, seed,
                                       lc.noise, cfg.threads);
    for (const auto& p : points) {
      csv += fmt::format("{},{},{},{},{}\n", p.ell, num(p.lambda), num(p.train_mse),
                         num(p.test_mse), p.seed);
    }
  }
  write_file(cfg.out, csv);
  return ok;
}

int cmd_gram_eig(const Flags& flags) {
  const Run run = prepare("gram-eig", "gram_eig", "K_max", flags);
  const auto& cfg = run.cfg;
  const auto& ge = cfg.gram_eig;
  const int K = run.kmax.value_or(ge.K_max);
  const auto spec = kernel_from_config(cfg);
  const auto table = lambda_table(spec, K);
  const auto entries = enumerate_spectrum(spec, table, K, {true, false, cfg.threads});
  const auto top = static_cast<std::size_t>(ge.top_k);
  const auto cover = cluster_cover(entries, top);
  if (cover > static_cast<std::size_t>(ge.ell)) {
    throw Error(ErrorKind::validation,
                fmt::format("gram_eig.ell = {} is smaller than the {} ranks needed", ge.ell, cover));
  }
  const auto ny = nystrom_eigs(spec, ge.ell, static_cast<int>(cover), cfg.seed, cfg.threads);
  const auto rows = compare_nystrom(ny, entries, std::pow(table.kappa, cfg.n), top);

  std::string csv =
      csv_header(run, "rank,nystrom,closed_form,rel_err,cluster_nystrom,cluster_rel_err");
  double worst = 0.0;
  for (const auto& r : rows) {
    worst = std::max(worst, r.cluster_rel_err);
    csv += fmt::format("{},{},{},{},{},{}\n", r.rank, num(r.nystrom), num(r.closed_form),
                       num(r.rel_err), num(r.cluster_nystrom), num(r.cluster_rel_err));
  }
  write_file(cfg.out, csv);
  const auto tol = run.tolerance ? run.tolerance : ge.tolerance;
  if (tol && !(worst <= *tol)) {
    logger()->error("max cluster relative error {} exceeds tolerance {}", worst, *tol);
    return tolerance;
  }
  return ok;
}

int cmd_cnn_label(const Flags& flags) {
  const Run run = prepare("cnn-label", "cnn_label", nullptr, flags);
  const auto& cfg = run.cfg;
  const auto& cl = cfg.cnn_label;
  const auto shapes = layer_chain(cfg.n, cfg.d, static_cast<int>(cfg.layers.size()), cl.filters,
                                  cl.patch_sizes, cl.boundary);
  auto params = random_params(shapes, cfg.seed, cl.pooling, cl.pooling_width, cl.boundary);
  if (cl.zero_weights) {
    for (auto& w : params.weights) w.setZero();
    params.readout.setZero();
  }

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                    static_cast<std::uint32_t>(cfg.seed >> 32), 0x636e6eu};
  std::mt19937_64 rng(seq);
  std::vector<PatchedImage> inputs;
  for (const auto& path : cl.images) {
    const Image img = read_image(path);
    PatchConfig pc;
    pc.side = cl.patch_side;
    pc.locations = cl.locations;
    if (cl.stride > 0) pc = PatchConfig::grid(cl.patch_side, img.height(), img.width(), cl.stride);
    if (static_cast<int>(pc.locations.size()) != cfg.n) {
      throw Error(ErrorKind::validation,
                  fmt::format("{}: stride grid gives {} patches, config has n = {}", path,
                              pc.locations.size(), cfg.n));
    }
    inputs.push_back(extract_patches(img, pc));
  }
  const int count = cl.images.empty() ? cl.count : static_cast<int>(inputs.size());

  std::string lines;
  for (int i = 0; i < count; ++i) {
    const auto x = cl.images.empty() ? sample_uniform(cfg.n, cfg.d, rng) : inputs[static_cast<std::size_t>(i)];
    json patches = json::array();
    for (int c = 0; c < x.count(); ++c) {
      const auto col = x.patch(c);
      patches.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    json rec{{"id", i}, {"patches", patches}, {"label", forward(params, cfg.layers, x)}};
    if (!cl.images.empty()) rec["source"] = cl.images[static_cast<std::size_t>(i)];
    lines += rec.dump() + "\n";
  }

  json meta = json_header(run);
  meta["count"] = count;
  meta["params"] = params;
  write_file(cfg.out, lines);
  write_file(sidecar(cfg.out, ".params.json"), meta.dump(2) + "\n");
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Mercer spectra and regression experiments for convolutional kernels", "harmonica"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  Flags flags;
  int (*handler)(const Flags&) = nullptr;
  auto add = [&](const char* name, const char* about, int (*fn)(const Flags&)) {
    auto* sub = app.add_subcommand(name, about);
    sub->add_option("--config", flags.config, "run config (JSON)")->required();
    sub->add_option("--out", flags.out, "output path");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--threads", flags.threads, "worker cap")->check(CLI::PositiveNumber);
    sub->add_option("--kmax", flags.kmax, "per-patch degree truncation");
    sub->add_option("--tolerance", flags.tolerance, "failure threshold");
    sub->callback([&handler, fn] { handler = fn; });
    return sub;
  };
  add("spectrum", "ranked Mercer eigenvalues and decay fit", cmd_spectrum);
  add("reconstruct", "direct kernel against its spectral sum", cmd_reconstruct);
  add("learning-curve", "regularized least squares over sample sizes", cmd_learning_curve);
  add("gram-eig", "Gram-matrix eigenvalues against the closed form", cmd_gram_eig);
  auto* label = add("cnn-label", "dataset labelled by a random network", cmd_cnn_label);
  label->add_option("--image", flags.images, "input image (PGM or text matrix), repeatable");
  label->add_option("--patch-side", flags.patch_side, "patch side r (d = r^2)")
      ->check(CLI::PositiveNumber);
  auto* stride = label->add_option("--stride", flags.stride, "stride of the patch grid")
                     ->check(CLI::PositiveNumber);
  label->add_option("--locations", flags.locations, "patch corners 'row,col;row,col;...'")
      ->excludes(stride);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(std::move(rev));
  } catch (const CLI::Success& e) {
    err << (e.get_name() == "CallForVersion" ? std::string(kVersion) + "\n" : app.help());
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "harmonica: " << e.what() << "\n";
    return validation;
  }

  try {
    return handler(flags);
  } catch (const Error& e) {
    err << "harmonica: " << e.what() << "\n";
    return e.kind() == ErrorKind::validation ? validation : failure;
  } catch (const std::exception& e) {
    err << "harmonica: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace harmonica::cli
