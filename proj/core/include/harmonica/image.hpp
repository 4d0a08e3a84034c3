#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace harmonica {

/// Single-channel image, row-major pixels.
class Image {
 public:
  Image(int height, int width, std::vector<double> pixels);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  double at(int row, int col) const {
    return pixels_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(col)];
  }
  const std::vector<double>& pixels() const noexcept { return pixels_; }

 private:
  int height_;
  int width_;
  std::vector<double> pixels_;
};

/// Top-left corner of an r x r window, 1-based: 1 <= row <= h - r + 1.
struct PatchLocation {
  int row = 1;
  int col = 1;
  bool operator==(const PatchLocation&) const = default;
};

struct PatchConfig {
  int side = 2;  // r; the patch dimension is d = r^2
  std::vector<PatchLocation> locations;

  int patch_dim() const noexcept { return side * side; }
  /// Throws ErrorKind::validation unless r^2 >= 2, at least one location is
  /// given, and every window fits inside an h x w image.
  void validate(int height, int width) const;

  /// Windows at rows/cols 1, 1 + stride, ... that fit in the image.
  static PatchConfig grid(int side, int height, int width, int stride);
};

/// A point of (S^{d-1})^n: column i of `patches` is the unit-norm patch i.
class PatchedImage {
 public:
  PatchedImage() = default;
  /// Takes ownership of a d x n matrix whose columns must have unit norm
  /// (checked to 1e-12).
  explicit PatchedImage(Eigen::MatrixXd patches);

  int count() const noexcept { return static_cast<int>(patches_.cols()); }
  int dim() const noexcept { return static_cast<int>(patches_.rows()); }
  auto patch(int i) const { return patches_.col(i); }
  const Eigen::MatrixXd& matrix() const noexcept { return patches_; }

 private:
  Eigen::MatrixXd patches_;
};

/// Flattens each window row-major and normalizes it. Throws
/// ErrorKind::degenerate_patch for an all-zero window.
PatchedImage extract_patches(const Image& img, const PatchConfig& cfg);

/// n independent uniform points on S^{d-1} drawn from `rng` (normalized
/// standard-normal vectors).
PatchedImage sample_uniform(int n, int d, std::mt19937_64& rng);
PatchedImage sample_uniform(int n, int d, std::uint64_t seed);
std::vector<PatchedImage> sample_uniform_batch(std::size_t count, int n, int d,
                                               std::mt19937_64& rng);

/// Plain-text matrix: first line "h w", then h rows of w reals.
Image read_text_image(std::istream& in);
/// Portable graymap, ASCII (P2) or binary (P5, 8 or 16 bit).
Image read_pgm(std::istream& in);
/// Dispatches on the magic bytes: "P2"/"P5" is a graymap, anything else is
/// the text matrix format.
Image read_image(const std::filesystem::path& path);

}  // namespace harmonica
