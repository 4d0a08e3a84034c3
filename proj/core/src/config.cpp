#include "harmonica/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

using json = nlohmann::json;

std::string pointer_escape(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

class Checker {
 public:
  Checker(std::string_view text, std::string_view source)
      : lines_(json_pointer_lines(text)), source_(source) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
    std::string p = pointer;
    int line = 1;
    // Fall back to the nearest enclosing member that exists in the text.
    while (true) {
      if (auto it = lines_.find(p); it != lines_.end()) {
        line = it->second;
        break;
      }
      const auto cut = p.rfind('/');
      if (cut == std::string::npos || p.empty()) break;
      p.resize(cut);
    }
    throw Error(ErrorKind::validation,
                fmt::format("{}:{}: {} (at {})", source_, line, what, pointer.empty() ? "/" : pointer));
  }

  void allow_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(ptr, "expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items()) {
      if (!allowed.count(k)) fail(ptr + "/" + pointer_escape(k), "unknown key '" + k + "'");
    }
  }

  const json* member(const json& obj, const char* key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  void read_int(const json& obj, const std::string& ptr, const char* key, int& out, long long lo,
                long long hi) const {
    const json* v = member(obj, key);
    if (!v) return;
    const std::string p = ptr + "/" + key;
    if (!v->is_number_integer()) fail(p, std::string("'") + key + "' must be an integer");
    const auto x = v->get<long long>();
    if (x < lo || x > hi) {
      fail(p, fmt::format("'{}' must lie in [{}, {}], got {}", key, lo, hi, x));
    }
    out = static_cast<int>(x);
  }

  void read_size(const json& obj, const std::string& ptr, const char* key, std::size_t& out) const {
    int v = static_cast<int>(out);
    read_int(obj, ptr, key, v, 0, 100000000);
    out = static_cast<std::size_t>(v);
  }

  void read_double(const json& obj, const std::string& ptr, const char* key, double& out,
                   double lo, double hi, bool open_lo = false) const {
    const json* v = member(obj, key);
    if (!v) return;
    const std::string p = ptr + "/" + key;
    if (!v->is_number()) fail(p, std::string("'") + key + "' must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x) || x < lo || x > hi || (open_lo && x == lo)) {
      fail(p, fmt::format("'{}' must lie in {}{}, {}], got {}", key, open_lo ? "(" : "[", lo, hi, x));
    }
    out = x;
  }

  void read_bool(const json& obj, const std::string& ptr, const char* key, bool& out) const {
    const json* v = member(obj, key);
    if (!v) return;
    if (!v->is_boolean()) fail(ptr + "/" + key, std::string("'") + key + "' must be true or false");
    out = v->get<bool>();
  }

  void read_int_list(const json& obj, const std::string& ptr, const char* key,
                     std::vector<int>& out, int lo) const {
    const json* v = member(obj, key);
    if (!v) return;
    const std::string p = ptr + "/" + key;
    if (!v->is_array()) fail(p, std::string("'") + key + "' must be an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& e = (*v)[i];
      if (!e.is_number_integer() || e.get<long long>() < lo || e.get<long long>() > 1000000) {
        fail(p + "/" + std::to_string(i), fmt::format("entries of '{}' must be integers >= {}", key, lo));
      }
      out.push_back(e.get<int>());
    }
  }

  template <class Parse, class T>
  void read_enum(const json& obj, const std::string& ptr, const char* key, T& out, Parse parse) const {
    const json* v = member(obj, key);
    if (!v) return;
    const std::string p = ptr + "/" + key;
    if (!v->is_string()) fail(p, std::string("'") + key + "' must be a string");
    try {
      out = parse(v->get<std::string>());
    } catch (const Error& e) {
      fail(p, e.what());
    }
  }

 private:
  std::map<std::string, int> lines_;
  std::string source_;
};

PoolingKind parse_pooling(std::string_view name) {
  if (name == "identity") return PoolingKind::identity;
  if (name == "gaussian") return PoolingKind::gaussian;
  throw Error(ErrorKind::validation, "pooling must be 'identity' or 'gaussian'");
}

ActivationSpec parse_layer(const Checker& c, const json& j, const std::string& ptr) {
  c.allow_keys(j, ptr, {"activation", "coefficients", "geometric_ratio"});
  const json* name = c.member(j, "activation");
  if (!name) c.fail(ptr, "layer needs an 'activation'");
  ActivationSpec spec;
  c.read_enum(j, ptr, "activation", spec.kind, parse_activation_kind);
  if (const json* coeffs = c.member(j, "coefficients")) {
    if (!coeffs->is_array() || coeffs->empty()) {
      c.fail(ptr + "/coefficients", "'coefficients' must be a non-empty array of numbers");
    }
    for (std::size_t i = 0; i < coeffs->size(); ++i) {
      if (!(*coeffs)[i].is_number() || !std::isfinite((*coeffs)[i].get<double>())) {
        c.fail(ptr + "/coefficients/" + std::to_string(i), "coefficients must be finite numbers");
      }
      spec.coefficients.push_back((*coeffs)[i].get<double>());
    }
  }
  if (c.member(j, "geometric_ratio")) {
    double r = 0.5;
    c.read_double(j, ptr, "geometric_ratio", r, 0.0, 1.0, true);
    if (r >= 1.0) c.fail(ptr + "/geometric_ratio", "'geometric_ratio' must be < 1");
    spec.geometric_ratio = r;
  }
  const bool wants_coeffs =
      spec.kind == ActivationKind::polynomial || spec.kind == ActivationKind::custom;
  if (!wants_coeffs && (!spec.coefficients.empty() || spec.geometric_ratio)) {
    c.fail(ptr, "only 'poly' and 'custom' layers take coefficients");
  }
  if (spec.kind == ActivationKind::polynomial && spec.geometric_ratio) {
    c.fail(ptr + "/geometric_ratio", "'poly' layers take coefficients only");
  }
  if (spec.kind == ActivationKind::polynomial && spec.coefficients.empty()) {
    c.fail(ptr, "'poly' layers need 'coefficients'");
  }
  if (spec.kind == ActivationKind::custom && spec.coefficients.empty() == !spec.geometric_ratio) {
    c.fail(ptr, "'custom' layers need exactly one of 'coefficients' or 'geometric_ratio'");
  }
  if (spec.kind == ActivationKind::custom) {
    for (std::size_t i = 0; i < spec.coefficients.size(); ++i) {
      if (spec.coefficients[i] < 0.0) {
        c.fail(ptr + "/coefficients/" + std::to_string(i), "custom series coefficients must be >= 0");
      }
    }
  }
  return spec;
}

}  // namespace

std::map<std::string, int> json_pointer_lines(std::string_view text) {
  struct Frame {
    bool object = false;
    bool expect_key = true;
    int index = 0;
    std::string path;
    std::string member;  // path of the member whose value comes next
  };
  std::map<std::string, int> lines;
  std::vector<Frame> stack;
  int line = 1;
  bool pending_element = false;  // array slot not yet recorded

  auto value_start = [&]() -> std::string {
    if (stack.empty()) return "";
    Frame& f = stack.back();
    if (f.object) return f.member;
    const std::string p = f.path + "/" + std::to_string(f.index);
    if (pending_element) {
      lines.emplace(p, line);
      pending_element = false;
    }
    return p;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
      continue;
    }
    if (ch == ' ' || ch == '\t' || ch == '\r') continue;
    if (ch == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          ++i;
          s += text[i] == 'n' ? '\n' : text[i];
        } else {
          if (text[i] == '\n') ++line;
          s += text[i];
        }
      }
      if (!stack.empty() && stack.back().object && stack.back().expect_key) {
        Frame& f = stack.back();
        f.member = f.path + "/" + pointer_escape(s);
        lines.emplace(f.member, line);
        f.expect_key = false;
      } else {
        value_start();
      }
      continue;
    }
    switch (ch) {
      case '{':
      case '[': {
        const std::string p = value_start();
        stack.push_back({ch == '{', true, 0, p, {}});
        pending_element = ch == '[';
        break;
      }
      case '}':
      case ']':
        if (!stack.empty()) stack.pop_back();
        pending_element = false;
        break;
      case ':':
        break;
      case ',':
        if (!stack.empty()) {
          if (stack.back().object) {
            stack.back().expect_key = true;
          } else {
            ++stack.back().index;
            pending_element = true;
          }
        }
        break;
      default:
        value_start();
        while (i + 1 < text.size() && std::string_view(",]}\n \t\r").find(text[i + 1]) ==
                                          std::string_view::npos) {
          ++i;
        }
        break;
    }
  }
  if (!lines.count("")) lines.emplace("", 1);
  return lines;
}

std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw Error(ErrorKind::validation, fmt::format("{}:{}: malformed JSON ({})", source, line, e.what()));
  }
  const Checker c(text, source);
  c.allow_keys(j, "", {"$schema", "description", "layers", "n", "d", "truncation", "seed", "threads",
                       "out", "spectrum", "reconstruct", "learning_curve", "gram_eig", "cnn_label"});
  RunConfig cfg;
  cfg.raw = j;

  const json* layers = c.member(j, "layers");
  if (!layers) c.fail("", "config needs a 'layers' array");
  if (!layers->is_array() || layers->empty()) c.fail("/layers", "'layers' must be a non-empty array");
  for (std::size_t i = 0; i < layers->size(); ++i) {
    cfg.layers.push_back(parse_layer(c, (*layers)[i], "/layers/" + std::to_string(i)));
  }
  if (!c.member(j, "n")) c.fail("", "config needs the patch count 'n'");
  if (!c.member(j, "d")) c.fail("", "config needs the patch dimension 'd'");
  c.read_int(j, "", "n", cfg.n, 1, 64);
  c.read_int(j, "", "d", cfg.d, 2, 4096);

  if (const json* t = c.member(j, "truncation")) {
    const std::string p = "/truncation";
    c.allow_keys(*t, p, {"K_max", "A_max", "Q_max", "s_tol", "series_order", "compose_terms",
                         "compose_tail_tol"});
    auto& tr = cfg.truncation;
    c.read_int(*t, p, "K_max", tr.K_max, 0, 4096);
    c.read_int(*t, p, "A_max", tr.A_max, 0, 256);
    c.read_int(*t, p, "Q_max", tr.Q_max, 1, 256);
    c.read_double(*t, p, "s_tol", tr.s_tol, 0.0, 0.5, true);
    c.read_int(*t, p, "series_order", tr.series_order, 1, 8192);
    c.read_int(*t, p, "compose_terms", tr.compose_terms, 1, 1024);
    c.read_double(*t, p, "compose_tail_tol", tr.compose_tail_tol, 0.0, 1.0, true);
  }
  if (const json* s = c.member(j, "seed")) {
    if (!s->is_number_unsigned()) c.fail("/seed", "'seed' must be a non-negative integer");
    cfg.seed = s->get<std::uint64_t>();
  }
  int threads = 1;
  c.read_int(j, "", "threads", threads, 1, 1024);
  cfg.threads = static_cast<unsigned>(threads);
  if (const json* o = c.member(j, "out")) {
    if (!o->is_string()) c.fail("/out", "'out' must be a path string");
    cfg.out = o->get<std::string>();
  }

  if (const json* s = c.member(j, "spectrum")) {
    const std::string p = "/spectrum";
    c.allow_keys(*s, p, {"K_max", "prune", "fit"});
    c.read_int(*s, p, "K_max", cfg.spectrum.K_max, 0, 4096);
    c.read_bool(*s, p, "prune", cfg.spectrum.prune);
    if (const json* f = c.member(*s, "fit")) {
      const std::string fp = p + "/fit";
      c.allow_keys(*f, fp, {"rank_lo", "rank_hi", "p_min", "p_max", "grid", "min_points"});
      auto& fo = cfg.spectrum.fit;
      c.read_size(*f, fp, "rank_lo", fo.rank_lo);
      c.read_size(*f, fp, "rank_hi", fo.rank_hi);
      c.read_double(*f, fp, "p_min", fo.p_min, 0.0, 1000.0, true);
      c.read_double(*f, fp, "p_max", fo.p_max, 0.0, 1000.0, true);
      c.read_int(*f, fp, "grid", fo.grid, 3, 100000);
      c.read_size(*f, fp, "min_points", fo.min_points);
      if (fo.rank_hi < fo.rank_lo) c.fail(fp, "'rank_hi' must be >= 'rank_lo'");
      if (fo.p_max <= fo.p_min) c.fail(fp, "'p_max' must exceed 'p_min'");
    }
  }
  if (const json* s = c.member(j, "reconstruct")) {
    const std::string p = "/reconstruct";
    c.allow_keys(*s, p, {"pairs", "K_max", "tolerance"});
    c.read_int(*s, p, "pairs", cfg.reconstruct.pairs, 1, 1000000);
    c.read_int(*s, p, "K_max", cfg.reconstruct.K_max, 0, 4096);
    c.read_double(*s, p, "tolerance", cfg.reconstruct.tolerance, 0.0, 1e300, true);
  }
  if (const json* s = c.member(j, "learning_curve")) {
    const std::string p = "/learning_curve";
    auto& lc = cfg.learning_curve;
    c.allow_keys(*s, p, {"sizes", "test_size", "schedule", "target", "noise", "repeats"});
    c.read_int_list(*s, p, "sizes", lc.sizes, 3);
    if (lc.sizes.empty()) c.fail(p + "/sizes", "'sizes' must not be empty");
    c.read_int(*s, p, "test_size", lc.test_size, 1, 10000000);
    c.read_double(*s, p, "noise", lc.noise, 0.0, 1e300);
    c.read_int(*s, p, "repeats", lc.repeats, 1, 1000);
    if (const json* sc = c.member(*s, "schedule")) {
      const std::string sp = p + "/schedule";
      c.allow_keys(*sc, sp, {"beta", "mu_exp"});
      c.read_double(*sc, sp, "beta", lc.schedule.beta, 0.0, 2.0, true);
      c.read_double(*sc, sp, "mu_exp", lc.schedule.mu_exp, 0.0, 1e6);
    }
    if (const json* t = c.member(*s, "target")) {
      const std::string tp = p + "/target";
      auto& tg = lc.target;
      c.allow_keys(*t, tp, {"kind", "degree", "count", "beta", "K_max", "filters", "patch_sizes",
                            "pooling", "pooling_width", "boundary"});
      c.read_enum(*t, tp, "kind", tg.kind, parse_target_kind);
      c.read_int(*t, tp, "degree", tg.degree, 0, 4096);
      c.read_int(*t, tp, "count", tg.count, 1, 100000);
      c.read_double(*t, tp, "beta", tg.beta, 0.0, 2.0, true);
      c.read_int(*t, tp, "K_max", tg.K_max, 0, 256);
      c.read_int_list(*t, tp, "filters", tg.filters, 1);
      c.read_int_list(*t, tp, "patch_sizes", tg.patch_sizes, 1);
      c.read_enum(*t, tp, "pooling", tg.pooling, parse_pooling);
      c.read_double(*t, tp, "pooling_width", tg.pooling_width, 0.0, 1e6, true);
      c.read_enum(*t, tp, "boundary", tg.boundary, parse_boundary);
    }
  }
  if (const json* s = c.member(j, "gram_eig")) {
    const std::string p = "/gram_eig";
    auto& g = cfg.gram_eig;
    c.allow_keys(*s, p, {"ell", "top_k", "K_max", "tolerance"});
    c.read_int(*s, p, "ell", g.ell, 1, 100000);
    c.read_int(*s, p, "top_k", g.top_k, 1, 100000);
    c.read_int(*s, p, "K_max", g.K_max, 0, 4096);
    if (c.member(*s, "tolerance")) {
      double tol = 0.1;
      c.read_double(*s, p, "tolerance", tol, 0.0, 1e300, true);
      g.tolerance = tol;
    }
    if (g.top_k > g.ell) c.fail(p + "/top_k", "'top_k' must not exceed 'ell'");
  }
  if (const json* s = c.member(j, "cnn_label")) {
    const std::string p = "/cnn_label";
    auto& cl = cfg.cnn_label;
    c.allow_keys(*s, p, {"count", "filters", "patch_sizes", "pooling", "pooling_width", "boundary",
                         "zero_weights", "images", "patch_side", "stride", "locations"});
    c.read_int(*s, p, "count", cl.count, 1, 10000000);
    c.read_int_list(*s, p, "filters", cl.filters, 1);
    c.read_int_list(*s, p, "patch_sizes", cl.patch_sizes, 1);
    c.read_enum(*s, p, "pooling", cl.pooling, parse_pooling);
    c.read_double(*s, p, "pooling_width", cl.pooling_width, 0.0, 1e6, true);
    c.read_enum(*s, p, "boundary", cl.boundary, parse_boundary);
    c.read_bool(*s, p, "zero_weights", cl.zero_weights);
    if (const json* im = c.member(*s, "images")) {
      if (!im->is_array() || im->empty()) c.fail(p + "/images", "'images' must be a non-empty array of paths");
      for (std::size_t i = 0; i < im->size(); ++i) {
        if (!(*im)[i].is_string()) c.fail(p + "/images/" + std::to_string(i), "image paths must be strings");
        cl.images.push_back((*im)[i].get<std::string>());
      }
    }
    c.read_int(*s, p, "patch_side", cl.patch_side, 1, 4096);
    c.read_int(*s, p, "stride", cl.stride, 1, 4096);
    if (const json* loc = c.member(*s, "locations")) {
      if (!loc->is_array() || loc->empty()) c.fail(p + "/locations", "'locations' must be a non-empty array");
      for (std::size_t i = 0; i < loc->size(); ++i) {
        const json& e = (*loc)[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
            e[0].get<long long>() < 1 || e[1].get<long long>() < 1) {
          c.fail(p + "/locations/" + std::to_string(i), "locations are [row, col] pairs of integers >= 1");
        }
        cl.locations.push_back({e[0].get<int>(), e[1].get<int>()});
      }
    }
    const bool placed = cl.stride > 0 || !cl.locations.empty();
    if (cl.stride > 0 && !cl.locations.empty()) {
      c.fail(p + "/stride", "give either 'stride' or 'locations', not both");
    }
    if (!cl.images.empty() && (cl.patch_side == 0 || !placed)) {
      c.fail(p + "/images", "image inputs need 'patch_side' and one of 'stride' or 'locations'");
    }
    if (cl.patch_side > 0 && cl.patch_side * cl.patch_side != cfg.d) {
      c.fail(p + "/patch_side", fmt::format("'patch_side' squared must equal d = {}", cfg.d));
    }
    if (!cl.locations.empty() && static_cast<int>(cl.locations.size()) != cfg.n) {
      c.fail(p + "/locations", fmt::format("need exactly n = {} locations", cfg.n));
    }
  }

  // Cross-field checks that need the kernel shape.
  try {
    const auto spec = kernel_from_config(cfg);
    if (c.member(j, "learning_curve")) cfg.learning_curve.schedule.validate(cfg.d, spec.d_star);
  } catch (const Error& e) {
    const std::string where = std::string(e.what()).find("beta") != std::string::npos
                                  ? "/learning_curve/schedule"
                                  : "/layers";
    c.fail(where, e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::validation, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

KernelSpec kernel_from_config(const RunConfig& cfg) {
  return build_kernel(cfg.layers, cfg.n, cfg.d, cfg.truncation);
}

}  // namespace harmonica
