#include "harmonica/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "harmonica/error.hpp"

namespace harmonica {

Image::Image(int height, int width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height <= 0 || width <= 0) {
    throw Error(ErrorKind::validation, "image dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorKind::structural, "pixel count does not match image dimensions");
  }
  for (double v : pixels_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::validation, "pixel values must be finite");
  }
}

void PatchConfig::validate(int height, int width) const {
  if (side < 1 || side * side < 2) {
    throw Error(ErrorKind::validation, "patch dimension r^2 must be at least 2");
  }
  if (locations.empty()) {
    throw Error(ErrorKind::validation, "at least one patch location is required");
  }
  for (const auto& loc : locations) {
    if (loc.row < 1 || loc.row > height - side + 1 || loc.col < 1 ||
        loc.col > width - side + 1) {
      throw Error(ErrorKind::validation,
                  "patch location (" + std::to_string(loc.row) + "," + std::to_string(loc.col) +
                      ") does not fit a " + std::to_string(height) + "x" +
                      std::to_string(width) + " image");
    }
  }
}

PatchConfig PatchConfig::grid(int side, int height, int width, int stride) {
  if (stride < 1) throw Error(ErrorKind::validation, "patch stride must be positive");
  PatchConfig cfg;
  cfg.side = side;
  for (int i = 1; i <= height - side + 1; i += stride) {
    for (int j = 1; j <= width - side + 1; j += stride) cfg.locations.push_back({i, j});
  }
  return cfg;
}

PatchedImage::PatchedImage(Eigen::MatrixXd patches) : patches_(std::move(patches)) {
  for (Eigen::Index i = 0; i < patches_.cols(); ++i) {
    if (std::abs(patches_.col(i).norm() - 1.0) > 1e-12) {
      throw Error(ErrorKind::validation,
                  "patch " + std::to_string(i) + " is not unit norm");
    }
  }
}

PatchedImage extract_patches(const Image& img, const PatchConfig& cfg) {
  cfg.validate(img.height(), img.width());
  const int r = cfg.side;
  Eigen::MatrixXd out(cfg.patch_dim(), static_cast<Eigen::Index>(cfg.locations.size()));
  for (std::size_t p = 0; p < cfg.locations.size(); ++p) {
    const auto& loc = cfg.locations[p];
    auto col = out.col(static_cast<Eigen::Index>(p));
    for (int a = 0; a < r; ++a) {
      for (int b = 0; b < r; ++b) col(a * r + b) = img.at(loc.row - 1 + a, loc.col - 1 + b);
    }
    const double norm = col.norm();
    if (norm == 0.0) {
      throw Error(ErrorKind::degenerate_patch,
                  "patch at (" + std::to_string(loc.row) + "," + std::to_string(loc.col) +
                      ") has zero norm");
    }
    col /= norm;
  }
  return PatchedImage(std::move(out));
}

PatchedImage sample_uniform(int n, int d, std::mt19937_64& rng) {
  if (n < 1 || d < 2) {
    throw Error(ErrorKind::domain, "uniform sampling needs n >= 1 and d >= 2");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(d, n);
  for (int i = 0; i < n; ++i) {
    double norm = 0.0;
    do {
      for (int k = 0; k < d; ++k) m(k, i) = normal(rng);
      norm = m.col(i).norm();
    } while (norm == 0.0);
    m.col(i) /= norm;
  }
  return PatchedImage(std::move(m));
}

PatchedImage sample_uniform(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_uniform(n, d, rng);
}

std::vector<PatchedImage> sample_uniform_batch(std::size_t count, int n, int d,
                                               std::mt19937_64& rng) {
  std::vector<PatchedImage> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_uniform(n, d, rng));
  return out;
}

Image read_text_image(std::istream& in) {
  int h = 0;
  int w = 0;
  if (!(in >> h >> w)) throw Error(ErrorKind::io, "text image: missing 'h w' header");
  if (h <= 0 || w <= 0) throw Error(ErrorKind::validation, "text image: bad dimensions");
  std::vector<double> px(static_cast<std::size_t>(h) * static_cast<std::size_t>(w));
  for (auto& v : px) {
    if (!(in >> v)) throw Error(ErrorKind::io, "text image: expected h*w pixel values");
  }
  return Image(h, w, std::move(px));
}

namespace {

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string discard;
      std::getline(in, discard);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

Image read_pgm(std::istream& in) {
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw Error(ErrorKind::io, "not a PGM file");
  int w = 0;
  int h = 0;
  int maxval = 0;
  try {
    w = std::stoi(pgm_token(in));
    h = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorKind::io, "PGM: malformed header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(ErrorKind::io, "PGM: bad header values");
  }
  std::vector<double> px(static_cast<std::size_t>(h) * static_cast<std::size_t>(w));
  if (magic == "P2") {
    for (auto& v : px) {
      if (!(in >> v)) throw Error(ErrorKind::io, "PGM: truncated pixel data");
    }
  } else {
    const bool wide = maxval > 255;
    for (auto& v : px) {
      unsigned char bytes[2] = {0, 0};
      if (!in.read(reinterpret_cast<char*>(bytes), wide ? 2 : 1)) {
        throw Error(ErrorKind::io, "PGM: truncated pixel data");
      }
      v = wide ? static_cast<double>((bytes[0] << 8) | bytes[1]) : static_cast<double>(bytes[0]);
    }
  }
  return Image(h, w, std::move(px));
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open image " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  in.clear();
  in.seekg(0);
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return read_pgm(in);
  return read_text_image(in);
}

}  // namespace harmonica
