#include "mebface/trainer.hpp"

#include <numeric>
#include <stdexcept>

#include "mebface/errors.hpp"

namespace mebface {
namespace {

enum Stream : std::uint64_t { kInitStream = 1, kShuffleStream = 2, kDropoutStream = 3 };

std::vector<Vector> resolve_targets(std::span<const TrainingSample> samples, const CodeBook& codes,
                                    std::size_t code_bits) {
  if (codes.bits() != code_bits) {
    throw ShapeError("train: codebook K=" + std::to_string(codes.bits()) + " but network K=" +
                     std::to_string(code_bits));
  }
  std::vector<Vector> targets;
  targets.reserve(samples.size());
  for (const auto& s : samples) targets.push_back(codes.at(s.user_id).targets());
  return targets;
}

}  // namespace

double mean_loss(std::span<const TrainingSample> samples, const CodeBook& codes,
                 const NetworkParams& params) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) {
    total += bce_loss(network_infer(s.input, params), codes.at(s.user_id).targets());
  }
  return total / static_cast<double>(samples.size());
}

TrainResult sgd_train(std::span<const TrainingSample> samples, const CodeBook& codes,
                      const TrainConfig& config, NetworkParams initial, Rng& rng,
                      std::span<const TrainingSample> validation, const EpochCallback& on_epoch) {
  if (samples.empty()) throw std::invalid_argument("train: empty dataset");
  if (config.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  const auto targets = resolve_targets(samples, codes, initial.arch.code_bits);
  for (const auto& s : validation) codes.at(s.user_id);

  TrainResult result{std::move(initial), {}, {}};
  NetworkParams& params = result.params;
  NetworkParams velocity = NetworkParams::zeros(params.arch);
  NetworkParams grads = NetworkParams::zeros(params.arch);

  Rng shuffle_rng = rng.derive(kShuffleStream);
  Rng dropout_rng = rng.derive(kDropoutStream);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      grads.for_each_buffer([](std::span<double> b) { std::fill(b.begin(), b.end(), 0.0); });
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const ForwardTrace trace = network_forward(samples[i].input, params, Mode::kTrain, dropout_rng);
        epoch_total += network_backward_accumulate(trace, targets[i], params, grads);
      }

      const double inv_batch = 1.0 / static_cast<double>(end - start);
      std::vector<std::span<double>> p_bufs, v_bufs, g_bufs;
      params.for_each_buffer([&](std::span<double> b) { p_bufs.push_back(b); });
      velocity.for_each_buffer([&](std::span<double> b) { v_bufs.push_back(b); });
      grads.for_each_buffer([&](std::span<double> b) { g_bufs.push_back(b); });
      for (std::size_t b = 0; b < p_bufs.size(); ++b) {
        auto p = p_bufs[b];
        auto v = v_bufs[b];
        auto g = g_bufs[b];
        for (std::size_t j = 0; j < p.size(); ++j) {
          const double step = g[j] * inv_batch + config.weight_decay * p[j];
          v[j] = config.momentum * v[j] - config.learning_rate * step;
          p[j] += v[j];
        }
      }
    }
    result.epoch_loss.push_back(epoch_total / static_cast<double>(samples.size()));
    double val = 0.0;
    if (!validation.empty()) {
      val = mean_loss(validation, codes, params);
      result.validation_loss.push_back(val);
    }
    if (on_epoch) on_epoch(epoch, result.epoch_loss.back(), val);
  }
  return result;
}

TrainResult sgd_train(std::span<const TrainingSample> samples, const CodeBook& codes,
                      const TrainConfig& config, const Architecture& arch, Rng& rng,
                      std::span<const TrainingSample> validation, const EpochCallback& on_epoch) {
  Rng init_rng = rng.derive(kInitStream);
  return sgd_train(samples, codes, config, init_params(arch, init_rng), rng, validation, on_epoch);
}

}  // namespace mebface
