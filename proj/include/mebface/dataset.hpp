#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mebface/image.hpp"
#include "mebface/rng.hpp"

namespace mebface {

struct LabeledImage {
  std::string user_id;
  GrayImage image;
};

using Dataset = std::vector<LabeledImage>;

/// Synthetic identities: each user owns a smooth random pattern (a sum of
/// soft-edged discs); every sample of that user is the pattern shifted by an
/// integer jitter, lit by a random linear gradient, plus Gaussian noise.
struct SynthSpec {
  std::size_t num_users = 10;
  std::size_t samples_per_user = 20;
  std::size_t image_size = 64;
  std::size_t blobs_per_user = 16;
  double blob_radius_min = 2.0;
  double blob_radius_max = 7.0;
  double blob_edge = 0.75;
  double illumination_amplitude = 0.3;
  std::size_t jitter = 2;
  double noise_sigma = 0.03;
  std::uint64_t seed = 1;

  void validate() const;
};

/// User ids "u000", "u001", ... so lexicographic order is numeric order.
std::string synth_user_id(std::size_t index);

Dataset gen_synth_dataset(const SynthSpec& spec);

/// Per user, `train_per_user` randomly chosen samples go to train and the
/// rest to test. Output keeps the input's relative order within each part.
std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, std::size_t train_per_user, Rng& rng);

std::vector<std::string> user_ids(const Dataset& dataset);

/// `<root>/<user_id>/<index>.pgm`
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);
/// Reads every `*.pgm` under `<root>/<user_id>/`, users and files sorted by name.
Dataset load_dataset(const std::filesystem::path& root);

}  // namespace mebface
