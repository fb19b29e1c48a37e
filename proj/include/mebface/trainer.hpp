#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mebface/codes.hpp"
#include "mebface/network.hpp"
#include "mebface/rng.hpp"

namespace mebface {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 200;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0;
};

/// One preprocessed (cropped, normalized) training input and its owner.
struct TrainingSample {
  Tensor3 input;
  std::string user_id;
};

struct TrainResult {
  NetworkParams params;
  /// Mean per-sample training loss (dropout active) for each epoch.
  std::vector<double> epoch_loss;
  /// Mean inference-mode loss on the validation set; empty without one.
  std::vector<double> validation_loss;
};

using EpochCallback = std::function<void(std::size_t epoch, double train_loss, double validation_loss)>;

/// Mini-batch SGD with classical momentum on summed binary cross-entropy;
/// the step uses the batch-mean gradient. Samples are reshuffled every
/// epoch. Shuffling and dropout draw from streams derived from `rng`, so a
/// fixed seed reproduces the run bit for bit.
TrainResult sgd_train(std::span<const TrainingSample> samples, const CodeBook& codes,
                      const TrainConfig& config, NetworkParams initial, Rng& rng,
                      std::span<const TrainingSample> validation = {},
                      const EpochCallback& on_epoch = {});

/// Same, starting from init_params(arch, rng').
TrainResult sgd_train(std::span<const TrainingSample> samples, const CodeBook& codes,
                      const TrainConfig& config, const Architecture& arch, Rng& rng,
                      std::span<const TrainingSample> validation = {},
                      const EpochCallback& on_epoch = {});

/// Mean inference-mode loss of `params` over `samples`.
double mean_loss(std::span<const TrainingSample> samples, const CodeBook& codes,
                 const NetworkParams& params);

}  // namespace mebface
