#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mebface/rng.hpp"
#include "mebface/tensor.hpp"

namespace mebface {

enum class Mode { kTrain, kInfer };

/// Filter bank of a valid, stride-1 convolution layer.
///
/// `filters` is laid out as [out_map][in_map][row][col]. The layer computes
/// cross-correlation (no kernel flip); since filters are learned the two
/// orientations describe the same function family.
struct ConvLayerParams {
  std::size_t out_maps = 0;
  std::size_t in_maps = 0;
  std::size_t filter_rows = 0;
  std::size_t filter_cols = 0;
  Vector filters;
  Vector biases;

  ConvLayerParams() = default;
  ConvLayerParams(std::size_t out, std::size_t in, std::size_t rows, std::size_t cols);

  std::size_t patch_size() const noexcept { return in_maps * filter_rows * filter_cols; }
  double& filter(std::size_t out, std::size_t in, std::size_t r, std::size_t c) {
    return filters[((out * in_maps + in) * filter_rows + r) * filter_cols + c];
  }
  double filter(std::size_t out, std::size_t in, std::size_t r, std::size_t c) const {
    return filters[((out * in_maps + in) * filter_rows + r) * filter_cols + c];
  }
  friend bool operator==(const ConvLayerParams&, const ConvLayerParams&) = default;
};

/// Fully connected layer; `weights` is row-major out_dim x in_dim.
struct DenseLayerParams {
  std::size_t out_dim = 0;
  std::size_t in_dim = 0;
  Vector weights;
  Vector biases;

  DenseLayerParams() = default;
  DenseLayerParams(std::size_t out, std::size_t in);

  double& weight(std::size_t o, std::size_t i) { return weights[o * in_dim + i]; }
  double weight(std::size_t o, std::size_t i) const { return weights[o * in_dim + i]; }
  friend bool operator==(const DenseLayerParams&, const DenseLayerParams&) = default;
};

// Convolution (pre-activation output).
Tensor3 conv_forward(const Tensor3& input, const ConvLayerParams& params);

/// Accumulates filter/bias gradients into `grads` and, when `grad_input` is
/// non-null, writes the gradient with respect to `input` into it.
void conv_backward(const Tensor3& input, const ConvLayerParams& params, const Tensor3& grad_output,
                   ConvLayerParams& grads, Tensor3* grad_input);

Tensor3 relu(const Tensor3& x);
Vector relu(std::span<const double> x);
double relu(double x);
/// Zeroes `grad` wherever the pre-activation was not positive.
void relu_backward(std::span<const double> pre_activation, std::span<double> grad);

struct PoolResult {
  Tensor3 output;
  /// For every output element, flat index of the selected input element.
  std::vector<std::size_t> argmax;
};

/// 2x2 non-overlapping max pooling with stride 2. A trailing odd row or
/// column is dropped. Ties go to the first element in row-major scan order.
PoolResult maxpool_forward(const Tensor3& input);
Tensor3 maxpool_backward(const Tensor3& grad_output, std::span<const std::size_t> argmax,
                         std::size_t in_maps, std::size_t in_rows, std::size_t in_cols);

Vector dense_forward(std::span<const double> x, const DenseLayerParams& params);
/// Accumulates weight/bias gradients; returns dL/dx.
Vector dense_backward(std::span<const double> x, const DenseLayerParams& params,
                      std::span<const double> grad_output, DenseLayerParams& grads);

double sigmoid(double x);
Vector sigmoid(std::span<const double> x);
Vector softmax(std::span<const double> x);

inline constexpr double kLogClamp = 1e-12;

/// Binary cross-entropy, summed over outputs, negated so that lower is better.
double bce_loss(std::span<const double> outputs, std::span<const double> targets);
/// Categorical cross-entropy against a one-hot (or soft) label, negated.
double ce_loss(std::span<const double> outputs, std::span<const double> labels);

struct DropoutResult {
  Vector output;
  /// 1 = kept, 0 = dropped. Empty in inference mode.
  std::vector<std::uint8_t> mask;
};

/// Inverted dropout: in training each unit is zeroed with probability `p`
/// and survivors are scaled by 1/(1-p). Inference is the identity.
DropoutResult dropout(std::span<const double> x, double p, Rng& rng, Mode mode);
void dropout_backward(std::span<const std::uint8_t> mask, double p, std::span<double> grad);

}  // namespace mebface
