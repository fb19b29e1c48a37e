#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mebface/errors.hpp"
#include "mebface/tensor.hpp"

namespace mebface {

/// Single-channel image with intensities in [0, 1], row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), pixels_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw ShapeError("GrayImage dimensions must be positive");
  }
  GrayImage(std::size_t rows, std::size_t cols, std::vector<double> pixels)
      : rows_(rows), cols_(cols), pixels_(std::move(pixels)) {
    if (rows == 0 || cols == 0) throw ShapeError("GrayImage dimensions must be positive");
    if (pixels_.size() != rows * cols) throw ShapeError("GrayImage pixel count mismatch");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  double& at(std::size_t r, std::size_t c) noexcept { return pixels_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return pixels_[r * cols_ + c]; }

  std::span<double> pixels() noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> pixels_;
};

/// Crop/flip augmentation settings: `working_size` is the m x m size every
/// image is brought to, `crop_size` the n x n crop taken from it.
struct AugmentConfig {
  std::size_t working_size = 64;
  std::size_t crop_size = 57;
  bool flip = true;

  void validate() const;
  /// (1 + flip) * (m - n + 1)^2
  std::size_t crop_count() const;
};

Tensor3 to_tensor(const GrayImage& image);

/// 1 x rows x cols tensor standardized to zero mean and unit variance (a
/// flat image becomes all zeros). This is what the network consumes.
Tensor3 to_network_input(const GrayImage& image);

// PGM (P5, maxval <= 255) I/O.
GrayImage load_image(const std::filesystem::path& path);
void save_image(const GrayImage& image, const std::filesystem::path& path);
GrayImage decode_pgm(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_pgm(const GrayImage& image);

/// Bilinear resize to size x size, sampling at pixel centers with edge clamping.
GrayImage resize(const GrayImage& image, std::size_t size);
GrayImage resize(const GrayImage& image, std::size_t rows, std::size_t cols);

GrayImage hflip(const GrayImage& image);

GrayImage crop(const GrayImage& image, std::size_t top, std::size_t left, std::size_t rows,
               std::size_t cols);

/// Every n x n crop of an m x m image in row-major origin order, each
/// resized back to m x m; with `flip`, each crop is followed immediately by
/// its horizontal mirror.
std::vector<GrayImage> crops_all(const GrayImage& image, const AugmentConfig& cfg);

}  // namespace mebface
