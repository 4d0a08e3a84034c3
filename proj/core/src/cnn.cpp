#include "harmonica/cnn.hpp"

#include <cmath>
#include <random>
#include <string>

#include "harmonica/error.hpp"

namespace harmonica {
namespace {

std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int rows, int cols) {
  const auto flat = j.get<std::vector<double>>();
  if (flat.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw Error(ErrorKind::structural, "matrix of shape " + shape_str(rows, cols) +
                                           " needs " + std::to_string(rows * cols) + " entries");
  }
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return flat;
}

}  // namespace

std::string_view to_string(Boundary b) noexcept {
  return b == Boundary::circular ? "circular" : "valid";
}

Boundary parse_boundary(std::string_view name) {
  if (name == "circular") return Boundary::circular;
  if (name == "valid") return Boundary::valid;
  throw Error(ErrorKind::validation, "boundary must be 'circular' or 'valid'");
}

std::vector<LayerShape> layer_chain(int n, int d, int layers, const std::vector<int>& filters,
                                    const std::vector<int>& patch_sizes, Boundary boundary) {
  if (n < 1 || d < 1 || layers < 1) {
    throw Error(ErrorKind::structural, "layer chain needs n, d, N >= 1");
  }
  if (filters.size() > static_cast<std::size_t>(layers) ||
      patch_sizes.size() > static_cast<std::size_t>(layers - 1)) {
    throw Error(ErrorKind::structural, "more filter counts or patch sizes than layers");
  }
  auto filter_at = [&](int k) {
    return static_cast<std::size_t>(k - 1) < filters.size() ? filters[static_cast<std::size_t>(k - 1)]
                                                            : 1;
  };
  std::vector<LayerShape> shapes{{d, 1, n}};
  for (int k = 1; k < layers; ++k) {
    const int prev_n = shapes.back().n;
    const int dk = static_cast<std::size_t>(k - 1) < patch_sizes.size()
                       ? patch_sizes[static_cast<std::size_t>(k - 1)]
                       : std::min(2, prev_n);
    if (dk < 1 || dk > prev_n) {
      throw Error(ErrorKind::structural, "hidden patch size " + std::to_string(dk) +
                                             " does not fit " + std::to_string(prev_n) +
                                             " pixels");
    }
    const int nk = boundary == Boundary::circular ? prev_n : prev_n - dk + 1;
    shapes.push_back({dk, filter_at(k), nk});
  }
  shapes.push_back({shapes.back().n, filter_at(layers), 1});
  return shapes;
}

void NetworkParams::validate() const {
  const int N = layers();
  if (N < 1) throw Error(ErrorKind::structural, "network needs at least one layer");
  if (shapes[0].p != 1) throw Error(ErrorKind::structural, "input layer has one channel");
  if (shapes[static_cast<std::size_t>(N)].n != 1 ||
      shapes[static_cast<std::size_t>(N)].d != shapes[static_cast<std::size_t>(N - 1)].n) {
    throw Error(ErrorKind::structural, "prediction layer must take the whole last image");
  }
  for (int k = 1; k < N; ++k) {
    const auto& prev = shapes[static_cast<std::size_t>(k - 1)];
    const auto& cur = shapes[static_cast<std::size_t>(k)];
    const int max_n = boundary == Boundary::circular ? prev.n : prev.n - cur.d + 1;
    if (cur.d < 1 || cur.d > prev.n || cur.n < 1 || cur.n > max_n || cur.p < 1) {
      throw Error(ErrorKind::structural, "layer " + std::to_string(k) + " shape is inconsistent");
    }
  }
  if (weights.size() != static_cast<std::size_t>(N) || pooling.size() != static_cast<std::size_t>(N)) {
    throw Error(ErrorKind::structural, "need one weight matrix and one pooling matrix per layer");
  }
  for (int k = 0; k < N; ++k) {
    const auto& s = shapes[static_cast<std::size_t>(k)];
    const auto& w = weights[static_cast<std::size_t>(k)];
    const int rows = shapes[static_cast<std::size_t>(k + 1)].p;
    if (w.rows() != rows || w.cols() != s.d * s.p) {
      throw Error(ErrorKind::structural, "W^" + std::to_string(k) + " is " +
                                             shape_str(w.rows(), w.cols()) + ", expected " +
                                             shape_str(rows, s.d * s.p));
    }
    const auto& g = pooling[static_cast<std::size_t>(k)];
    if (g.rows() != s.n || g.cols() != s.n) {
      throw Error(ErrorKind::structural, "pooling at layer " + std::to_string(k) + " must be " +
                                             shape_str(s.n, s.n));
    }
    if (!w.allFinite() || !g.allFinite()) {
      throw Error(ErrorKind::structural, "network parameters must be finite");
    }
  }
  const auto& last = shapes[static_cast<std::size_t>(N)];
  if (readout.size() != last.d * last.p || !readout.allFinite()) {
    throw Error(ErrorKind::structural, "readout W^N must have length " +
                                           std::to_string(last.d * last.p));
  }
}

NetworkParams random_params(const std::vector<LayerShape>& shapes, std::uint64_t seed,
                            PoolingKind pooling, double pooling_width, Boundary boundary) {
  if (shapes.size() < 2) throw Error(ErrorKind::structural, "network needs at least one layer");
  if (pooling == PoolingKind::gaussian && !(pooling_width > 0.0)) {
    throw Error(ErrorKind::validation, "pooling width must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  NetworkParams params;
  params.shapes = shapes;
  params.boundary = boundary;
  const int N = static_cast<int>(shapes.size()) - 1;
  for (int k = 0; k < N; ++k) {
    const auto& s = shapes[static_cast<std::size_t>(k)];
    const int rows = shapes[static_cast<std::size_t>(k + 1)].p;
    const int cols = s.d * s.p;
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) w(r, c) = scale * normal(rng);
    }
    params.weights.push_back(std::move(w));
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(s.n, s.n);
    if (pooling == PoolingKind::gaussian) {
      for (int i = 0; i < s.n; ++i) {
        for (int j = 0; j < s.n; ++j) {
          const double dist = i - j;
          g(i, j) = std::exp(-dist * dist / (2.0 * pooling_width * pooling_width));
        }
      }
    }
    params.pooling.push_back(std::move(g));
  }
  const auto& last = shapes[static_cast<std::size_t>(N)];
  const int len = last.d * last.p;
  params.readout.resize(len);
  for (int i = 0; i < len; ++i) params.readout(i) = normal(rng) / std::sqrt(static_cast<double>(len));
  params.validate();
  return params;
}

Eigen::VectorXd forward_state(const NetworkParams& params,
                              const std::vector<ActivationSpec>& activations,
                              const PatchedImage& x) {
  params.validate();
  const int N = params.layers();
  if (static_cast<int>(activations.size()) != N) {
    throw Error(ErrorKind::structural, "need one activation per layer: got " +
                                           std::to_string(activations.size()) + " for " +
                                           std::to_string(N));
  }
  const auto& in = params.shapes[0];
  if (x.count() != in.n || x.dim() != in.d) {
    throw Error(ErrorKind::structural, "input has " + std::to_string(x.count()) +
                                           " patches of dimension " + std::to_string(x.dim()) +
                                           ", network expects " + std::to_string(in.n) + " of " +
                                           std::to_string(in.d));
  }
  // Columns are the patches X^k_i in R^{d_k p_k}.
  Eigen::MatrixXd state = x.matrix();
  for (int k = 0; k < N; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    Eigen::MatrixXd z = params.weights[uk] * state;  // p_{k+1} x n_k
    const auto& sigma = activations[uk];
    z = z.unaryExpr([&sigma](double v) { return sigma(v); });
    const Eigen::MatrixXd pooled = z * params.pooling[uk].transpose();
    const auto& next = params.shapes[uk + 1];
    const int n_prev = params.shapes[uk].n;
    const int p = next.p;
    Eigen::MatrixXd out(next.d * p, next.n);
    for (int q = 0; q < next.n; ++q) {
      for (int l = 0; l < next.d; ++l) {
        const int src = params.boundary == Boundary::circular ? (q + l) % n_prev : q + l;
        out.block(l * p, q, p, 1) = pooled.col(src);
      }
    }
    state = std::move(out);
  }
  return state.col(0);
}

double forward(const NetworkParams& params, const std::vector<ActivationSpec>& activations,
               const PatchedImage& x) {
  return forward_state(params, activations, x).dot(params.readout);
}

void to_json(nlohmann::json& j, const NetworkParams& params) {
  j = nlohmann::json::object();
  j["boundary"] = std::string(to_string(params.boundary));
  auto& shapes = j["shapes"] = nlohmann::json::array();
  for (const auto& s : params.shapes) shapes.push_back({{"d", s.d}, {"p", s.p}, {"n", s.n}});
  auto& weights = j["weights"] = nlohmann::json::array();
  for (const auto& w : params.weights) weights.push_back(matrix_to_json(w));
  auto& pooling = j["pooling"] = nlohmann::json::array();
  for (const auto& g : params.pooling) pooling.push_back(matrix_to_json(g));
  j["readout"] = std::vector<double>(params.readout.data(),
                                     params.readout.data() + params.readout.size());
}

void from_json(const nlohmann::json& j, NetworkParams& params) {
  NetworkParams out;
  try {
    out.boundary = parse_boundary(j.at("boundary").get<std::string>());
    for (const auto& s : j.at("shapes")) {
      out.shapes.push_back({s.at("d").get<int>(), s.at("p").get<int>(), s.at("n").get<int>()});
    }
    const int N = static_cast<int>(out.shapes.size()) - 1;
    if (N < 1 || j.at("weights").size() != static_cast<std::size_t>(N) ||
        j.at("pooling").size() != static_cast<std::size_t>(N)) {
      throw Error(ErrorKind::structural, "parameter arrays do not match the layer count");
    }
    for (int k = 0; k < N; ++k) {
      const auto& s = out.shapes[static_cast<std::size_t>(k)];
      out.weights.push_back(matrix_from_json(j.at("weights")[static_cast<std::size_t>(k)],
                                             out.shapes[static_cast<std::size_t>(k + 1)].p,
                                             s.d * s.p));
      out.pooling.push_back(
          matrix_from_json(j.at("pooling")[static_cast<std::size_t>(k)], s.n, s.n));
    }
    const auto r = j.at("readout").get<std::vector<double>>();
    out.readout = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::structural, std::string("network parameters: ") + e.what());
  }
  out.validate();
  params = std::move(out);
}

}  // namespace harmonica
