#include "mebface/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "mebface/errors.hpp"

namespace mebface {
namespace {

struct Blob {
  double row, col, radius, amplitude;
};

// Discs with a logistic rim of width `edge`: smooth, but with most of their
// contrast at the feature boundary like eyes or a mouth.
GrayImage render_pattern(const std::vector<Blob>& blobs, double edge, std::size_t size) {
  GrayImage img(size, size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      double v = 0.0;
      for (const auto& b : blobs) {
        const double dr = static_cast<double>(r) - b.row;
        const double dc = static_cast<double>(c) - b.col;
        const double d = std::sqrt(dr * dr + dc * dc);
        v += b.amplitude / (1.0 + std::exp((d - b.radius) / edge));
      }
      img.at(r, c) = v;
    }
  }
  // squash into [0.2, 0.8] so nuisance has headroom before clipping
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const double low = *lo;
  const double range = std::max(*hi - *lo, 1e-12);
  for (double& v : img.pixels()) v = 0.2 + 0.6 * (v - low) / range;
  return img;
}

}  // namespace

void SynthSpec::validate() const {
  if (num_users < 2) throw std::invalid_argument("synth: need at least 2 users");
  if (samples_per_user < 2) throw std::invalid_argument("synth: need at least 2 samples per user");
  if (image_size < 8) throw std::invalid_argument("synth: image size must be >= 8");
  if (blobs_per_user == 0) throw std::invalid_argument("synth: need at least one blob");
  if (!(blob_radius_min > 0.0 && blob_radius_max >= blob_radius_min)) {
    throw std::invalid_argument("synth: invalid blob radius range");
  }
  if (!(blob_edge > 0.0)) throw std::invalid_argument("synth: blob edge width must be positive");
  if (illumination_amplitude < 0.0 || noise_sigma < 0.0) {
    throw std::invalid_argument("synth: nuisance amplitudes must be >= 0");
  }
  if (jitter * 2 >= image_size) throw std::invalid_argument("synth: jitter too large");
}

std::string synth_user_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%03zu", index);
  return buf;
}

Dataset gen_synth_dataset(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto m = static_cast<double>(spec.image_size);
  Dataset dataset;
  dataset.reserve(spec.num_users * spec.samples_per_user);
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    std::vector<Blob> blobs(spec.blobs_per_user);
    for (auto& b : blobs) {
      b.row = rng.uniform(0.1 * m, 0.9 * m);
      b.col = rng.uniform(0.1 * m, 0.9 * m);
      b.radius = rng.uniform(spec.blob_radius_min, spec.blob_radius_max);
      b.amplitude = rng.uniform(-1.0, 1.0);
    }
    const GrayImage base = render_pattern(blobs, spec.blob_edge, spec.image_size);
    const auto n = static_cast<std::ptrdiff_t>(spec.image_size);
    for (std::size_t s = 0; s < spec.samples_per_user; ++s) {
      const auto span = static_cast<std::ptrdiff_t>(2 * spec.jitter + 1);
      const auto dy = static_cast<std::ptrdiff_t>(rng.below(static_cast<std::size_t>(span))) -
                      static_cast<std::ptrdiff_t>(spec.jitter);
      const auto dx = static_cast<std::ptrdiff_t>(rng.below(static_cast<std::size_t>(span))) -
                      static_cast<std::ptrdiff_t>(spec.jitter);
      const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const double strength = rng.uniform(-1.0, 1.0) * spec.illumination_amplitude;
      const double gy = std::sin(angle) * strength;
      const double gx = std::cos(angle) * strength;
      GrayImage img(spec.image_size, spec.image_size);
      for (std::ptrdiff_t r = 0; r < n; ++r) {
        for (std::ptrdiff_t c = 0; c < n; ++c) {
          const auto sr = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r - dy, 0, n - 1));
          const auto sc = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(c - dx, 0, n - 1));
          const double light = gy * (static_cast<double>(r) / m - 0.5) + gx * (static_cast<double>(c) / m - 0.5);
          const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
          img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
              std::clamp(base.at(sr, sc) + light + noise, 0.0, 1.0);
        }
      }
      dataset.push_back({synth_user_id(u), std::move(img)});
    }
  }
  return dataset;
}

std::vector<std::string> user_ids(const Dataset& dataset) {
  std::vector<std::string> ids;
  for (const auto& s : dataset) ids.push_back(s.user_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, std::size_t train_per_user, Rng& rng) {
  std::map<std::string, std::vector<std::size_t>> by_user;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_user[dataset[i].user_id].push_back(i);
  std::vector<bool> is_train(dataset.size(), false);
  for (auto& [id, indices] : by_user) {
    if (indices.size() <= train_per_user) {
      throw std::invalid_argument("split: user " + id + " has " + std::to_string(indices.size()) +
                                  " samples, need more than " + std::to_string(train_per_user));
    }
    rng.shuffle(std::span(indices));
    for (std::size_t k = 0; k < train_per_user; ++k) is_train[indices[k]] = true;
  }
  std::pair<Dataset, Dataset> parts;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (is_train[i] ? parts.first : parts.second).push_back(dataset[i]);
  }
  return parts;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& root) {
  std::map<std::string, std::size_t> counters;
  for (const auto& sample : dataset) {
    const auto dir = root / sample.user_id;
    std::filesystem::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof(name), "%03zu.pgm", counters[sample.user_id]++);
    save_image(sample.image, dir / name);
  }
}

Dataset load_dataset(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw FileError("dataset root not found: " + root.string());
  std::vector<std::filesystem::path> users;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory()) users.push_back(entry.path());
  }
  std::sort(users.begin(), users.end());
  Dataset dataset;
  for (const auto& dir : users) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) dataset.push_back({dir.filename().string(), load_image(f)});
  }
  if (dataset.empty()) throw FormatError("dataset: no .pgm files under " + root.string());
  return dataset;
}

}  // namespace mebface
