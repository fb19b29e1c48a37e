#include "mebface/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace mebface {

void AugmentConfig::validate() const {
  if (working_size == 0 || crop_size == 0 || crop_size > working_size) {
    throw std::invalid_argument("augment: need 1 <= crop_size <= working_size, got n=" +
                                std::to_string(crop_size) + " m=" + std::to_string(working_size));
  }
}

std::size_t AugmentConfig::crop_count() const {
  validate();
  const std::size_t offsets = working_size - crop_size + 1;
  return (flip ? 2 : 1) * offsets * offsets;
}

Tensor3 to_tensor(const GrayImage& image) {
  Tensor3 t(1, image.rows(), image.cols());
  std::copy(image.pixels().begin(), image.pixels().end(), t.data());
  return t;
}

Tensor3 to_network_input(const GrayImage& image) {
  Tensor3 t = to_tensor(image);
  const auto n = static_cast<double>(t.size());
  double mean = 0.0;
  for (double v : t.values()) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : t.values()) var += (v - mean) * (v - mean);
  var /= n;
  const double scale = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
  for (double& v : t.values()) v = (v - mean) * scale;
  return t;
}

namespace {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then parses a decimal integer.
  std::size_t read_number(const char* what) {
    skip_separators();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw FormatError(std::string("pgm: expected ") + what);
    }
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > (1u << 24)) throw FormatError(std::string("pgm: ") + what + " too large");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("pgm: missing whitespace before raster");
    }
    return pos_ + 1;
  }

  std::size_t pos_ = 0;

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const unsigned char> bytes_;
};

}  // namespace

GrayImage decode_pgm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("pgm: missing P5 magic");
  }
  PgmHeaderReader reader(bytes);
  reader.pos_ = 2;
  const std::size_t cols = reader.read_number("width");
  const std::size_t rows = reader.read_number("height");
  const std::size_t maxval = reader.read_number("maxval");
  if (cols == 0 || rows == 0) throw FormatError("pgm: zero dimension");
  if (maxval == 0 || maxval > 255) throw FormatError("pgm: only 8-bit maxval (1..255) supported");
  const std::size_t offset = reader.raster_offset();
  if (bytes.size() - std::min(offset, bytes.size()) < rows * cols) {
    throw FormatError("pgm: truncated raster");
  }
  std::vector<double> pixels(rows * cols);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const auto v = static_cast<double>(bytes[offset + i]);
    pixels[i] = std::min(v, static_cast<double>(maxval)) / static_cast<double>(maxval);
  }
  return GrayImage(rows, cols, std::move(pixels));
}

std::vector<unsigned char> encode_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + image.size());
  for (double v : image.pixels()) {
    out.push_back(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  return out;
}

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open image: " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_image(const GrayImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write image: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

GrayImage resize(const GrayImage& image, std::size_t size) { return resize(image, size, size); }

GrayImage resize(const GrayImage& image, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("resize: target size must be >= 1");
  if (rows == image.rows() && cols == image.cols()) return image;

  const double sy = static_cast<double>(image.rows()) / static_cast<double>(rows);
  const double sx = static_cast<double>(image.cols()) / static_cast<double>(cols);
  const auto max_r = static_cast<double>(image.rows() - 1);
  const auto max_c = static_cast<double>(image.cols() - 1);
  GrayImage out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double fy = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, max_r);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.rows() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t c = 0; c < cols; ++c) {
      const double fx = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, max_c);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.cols() - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = (1.0 - wx) * image.at(y0, x0) + wx * image.at(y0, x1);
      const double bottom = (1.0 - wx) * image.at(y1, x0) + wx * image.at(y1, x1);
      out.at(r, c) = (1.0 - wy) * top + wy * bottom;
    }
  }
  return out;
}

GrayImage hflip(const GrayImage& image) {
  GrayImage out(image.rows(), image.cols());
  for (std::size_t r = 0; r < image.rows(); ++r) {
    for (std::size_t c = 0; c < image.cols(); ++c) out.at(r, c) = image.at(r, image.cols() - 1 - c);
  }
  return out;
}

GrayImage crop(const GrayImage& image, std::size_t top, std::size_t left, std::size_t rows,
               std::size_t cols) {
  if (top + rows > image.rows() || left + cols > image.cols()) {
    throw ShapeError("crop window exceeds image bounds");
  }
  GrayImage out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = image.at(top + r, left + c);
  }
  return out;
}

std::vector<GrayImage> crops_all(const GrayImage& image, const AugmentConfig& cfg) {
  cfg.validate();
  const std::size_t m = cfg.working_size;
  if (image.rows() != m || image.cols() != m) {
    throw ShapeError("crops_all: image is " + std::to_string(image.rows()) + "x" +
                     std::to_string(image.cols()) + ", expected " + std::to_string(m) + "x" +
                     std::to_string(m));
  }
  const std::size_t offsets = m - cfg.crop_size + 1;
  std::vector<GrayImage> crops;
  crops.reserve(cfg.crop_count());
  for (std::size_t top = 0; top < offsets; ++top) {
    for (std::size_t left = 0; left < offsets; ++left) {
      crops.push_back(resize(crop(image, top, left, cfg.crop_size, cfg.crop_size), m));
      if (cfg.flip) crops.push_back(hflip(crops.back()));
    }
  }
  return crops;
}

}  // namespace mebface
