#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mebface/dataset.hpp"
#include "mebface/matcher.hpp"
#include "mebface/network.hpp"
#include "mebface/trainer.hpp"
#include "mebface/vault.hpp"

namespace mebface {

struct ScoreSets {
  /// Each test sample against its own user's template.
  std::vector<MatchScore> genuine;
  /// Each test sample against every other enrolled template.
  std::vector<MatchScore> imposter;
};

std::vector<double> score_values(std::span<const MatchScore> scores);

/// Brings an image to the working size (bilinear) if it is not already m x m.
GrayImage to_working_size(const GrayImage& image, const AugmentConfig& cfg);

/// Every crop (and flip) of every image, illumination-normalized.
std::vector<TrainingSample> build_training_set(const Dataset& images, const AugmentConfig& cfg);

/// Crop digests are computed once per test sample and reused for all templates.
ScoreSets collect_scores(const CodeEncoder& encoder, const Vault& vault, const Dataset& test,
                         const AugmentConfig& cfg);

struct AttackResult {
  /// probe-major: probe p against the u-th enrolled user (vault order).
  std::vector<MatchScore> noise;
  std::vector<MatchScore> unseen;
};

/// Uniform-noise images (and optional images of people never enrolled)
/// scored against every template.
AttackResult attack_sim(const CodeEncoder& encoder, const Vault& vault, const AugmentConfig& cfg,
                        std::size_t noise_count, const Dataset& unseen, Rng& rng);

struct ProtocolConfig {
  Architecture arch;
  TrainConfig train;
  AugmentConfig augment;
  std::size_t train_per_user = 10;
  /// Training samples per user held out for per-epoch validation loss.
  std::size_t validation_per_user = 0;
  std::size_t splits = 10;
  std::uint64_t seed = 0;
  /// Noise probes fed to the split-0 system; 0 disables the attack run.
  std::size_t attack_noise = 0;
};

struct SplitMetrics {
  double gar_at_zero_far = 0.0;
  double eer = 0.0;
  std::vector<double> epoch_loss;
  std::vector<double> validation_loss;
};

struct EvalReport {
  std::size_t crops_per_sample = 0;
  std::vector<SplitMetrics> splits;
  double gar_mean = 0.0;
  double gar_std = 0.0;
  double eer_mean = 0.0;
  double eer_std = 0.0;
  /// Pooled over all splits.
  std::vector<MatchScore> genuine;
  std::vector<MatchScore> imposter;
  std::vector<MatchScore> attack;

  std::vector<std::size_t> genuine_histogram() const;
  std::vector<std::size_t> imposter_histogram() const;
  std::vector<std::size_t> attack_histogram() const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// For each split: random train/test split, fresh codebook, training,
/// enrollment (codes discarded afterwards), scoring and metrics.
EvalReport run_protocol(const Dataset& dataset, const ProtocolConfig& config,
                        const ProgressFn& progress = {});

}  // namespace mebface
