#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "harmonica/activations.hpp"
#include "harmonica/image.hpp"

namespace harmonica {

// Boundary rule for hidden-layer patch extraction: windows that run past the
// last pixel either wrap around (circular) or are not formed (valid).
enum class Boundary { circular, valid };

std::string_view to_string(Boundary b) noexcept;
Boundary parse_boundary(std::string_view name);

/// Sizes at layer k: patch size d_k, filter count p_k, patch count n_k. Layer
/// 0 is the input (d, 1, n); layer N is the prediction layer (n_{N-1}, p_N, 1).
struct LayerShape {
  int d = 1;
  int p = 1;
  int n = 1;
  bool operator==(const LayerShape&) const = default;
};

/// Shapes for an N-layer network on n patches of dimension d. Hidden layers
/// use `filters[k-1]` filters and patches of `patch_sizes[k-1]` consecutive
/// pixels (defaults: one filter, patch size min(2, n_{k-1})).
std::vector<LayerShape> layer_chain(int n, int d, int layers, const std::vector<int>& filters,
                                    const std::vector<int>& patch_sizes, Boundary boundary);

struct NetworkParams {
  std::vector<LayerShape> shapes;          // N + 1 entries
  std::vector<Eigen::MatrixXd> weights;    // W^k, p_{k+1} x (d_k p_k), k < N
  Eigen::VectorXd readout;                 // W^N, length d_N p_N
  std::vector<Eigen::MatrixXd> pooling;    // gamma^k, n_k x n_k, k < N
  Boundary boundary = Boundary::circular;

  int layers() const noexcept { return static_cast<int>(shapes.size()) - 1; }
  /// Throws ErrorKind::structural when shapes, weights and pooling disagree.
  void validate() const;
};

enum class PoolingKind { identity, gaussian };

/// Gaussian weights with variance 1 / fan_in, deterministic per seed.
/// Gaussian pooling uses gamma_ij = exp(-(i - j)^2 / (2 width^2)).
NetworkParams random_params(const std::vector<LayerShape>& shapes, std::uint64_t seed,
                            PoolingKind pooling = PoolingKind::identity,
                            double pooling_width = 1.0, Boundary boundary = Boundary::circular);

/// The last hidden state X^N, flattened (length d_N p_N).
Eigen::VectorXd forward_state(const NetworkParams& params,
                              const std::vector<ActivationSpec>& activations,
                              const PatchedImage& x);

/// N_W(x) = <X^N, W^N>.
double forward(const NetworkParams& params, const std::vector<ActivationSpec>& activations,
               const PatchedImage& x);

void to_json(nlohmann::json& j, const NetworkParams& params);
void from_json(const nlohmann::json& j, NetworkParams& params);

}  // namespace harmonica
