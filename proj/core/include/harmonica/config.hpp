#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "harmonica/activations.hpp"
#include "harmonica/cnn.hpp"
#include "harmonica/kernel.hpp"
#include "harmonica/krr.hpp"
#include "harmonica/spectrum.hpp"

namespace harmonica {

struct SpectrumSection {
  int K_max = 20;
  bool prune = true;
  DecayFitOptions fit;
};

struct ReconstructSection {
  int pairs = 100;
  int K_max = 20;
  double tolerance = 1e-5;  // on |direct - spectral| / K(x, x)
};

struct LearningCurveSection {
  std::vector<int> sizes{32, 64, 128, 256, 512, 1024};
  int test_size = 2000;
  Schedule schedule;
  TargetConfig target;
  double noise = 0.0;
  int repeats = 1;  // independent seeds seed, seed + 1, ...
};

struct GramEigSection {
  int ell = 2000;
  int top_k = 10;
  int K_max = 20;
  std::optional<double> tolerance;  // on the cluster relative error
};

struct CnnLabelSection {
  int count = 100;
  std::vector<int> filters;
  std::vector<int> patch_sizes;
  PoolingKind pooling = PoolingKind::identity;
  double pooling_width = 1.0;
  Boundary boundary = Boundary::circular;
  bool zero_weights = false;
  // Optional image inputs; when set they replace the sampled points.
  std::vector<std::string> images;
  int patch_side = 0;
  int stride = 0;
  std::vector<PatchLocation> locations;
};

struct RunConfig {
  std::vector<ActivationSpec> layers;
  int n = 1;
  int d = 3;
  Truncation truncation;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
  SpectrumSection spectrum;
  ReconstructSection reconstruct;
  LearningCurveSection learning_curve;
  GramEigSection gram_eig;
  CnnLabelSection cnn_label;
  nlohmann::json raw;
};

/// Line number (1-based) of every member and array element, keyed by JSON
/// pointer. The text must already be valid JSON.
std::map<std::string, int> json_pointer_lines(std::string_view text);

/// Parses and validates a run config. Errors are ErrorKind::validation with
/// messages of the form "<source>:<line>: <what>".
RunConfig parse_run_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// FNV-1a 64 of the compact serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

KernelSpec kernel_from_config(const RunConfig& cfg);

}  // namespace harmonica
