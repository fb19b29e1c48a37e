#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mebface/image.hpp"
#include "mebface/layers.hpp"
#include "mebface/rng.hpp"
#include "mebface/tensor.hpp"

namespace mebface {

/// Layer sizes of the conv -> pool -> conv -> pool -> fc -> fc -> sigmoid stack.
struct Architecture {
  std::size_t input_size = 64;
  std::size_t conv1_maps = 32;
  std::size_t conv1_filter = 7;
  std::size_t conv2_maps = 64;
  std::size_t conv2_filter = 7;
  std::size_t fc1_units = 2000;
  std::size_t fc2_units = 2000;
  std::size_t code_bits = 256;
  double dropout = 0.5;

  /// 32 and 64 7x7 filters, two 2000-unit hidden layers, 64x64 input.
  static Architecture reference(std::size_t code_bits);

  /// Throws ShapeError if the input does not survive both conv/pool stages.
  void validate() const;

  std::size_t conv1_out() const { return input_size - conv1_filter + 1; }
  std::size_t pool1_out() const { return conv1_out() / 2; }
  std::size_t conv2_out() const { return pool1_out() - conv2_filter + 1; }
  std::size_t pool2_out() const { return conv2_out() / 2; }
  std::size_t flatten_size() const { return conv2_maps * pool2_out() * pool2_out(); }

  /// Human-readable shapes after conv1, pool1, conv2, pool2, flatten, fc1, fc2, out.
  std::vector<std::string> shape_chain() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct NetworkParams {
  Architecture arch;
  ConvLayerParams conv1;
  ConvLayerParams conv2;
  DenseLayerParams fc1;
  DenseLayerParams fc2;
  DenseLayerParams out;

  /// All-zero parameters shaped for `arch`.
  static NetworkParams zeros(const Architecture& arch);

  std::size_t parameter_count() const;

  /// Visits every parameter buffer in serialization order:
  /// conv1 filters, conv1 biases, conv2 filters, conv2 biases, then
  /// weights and biases of fc1, fc2, out.
  void for_each_buffer(const std::function<void(std::span<double>)>& fn);
  void for_each_buffer(const std::function<void(std::span<const double>)>& fn) const;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Intermediate values kept for backpropagation.
struct ForwardTrace {
  Mode mode = Mode::kInfer;
  Tensor3 input;
  Tensor3 conv1_pre;
  Tensor3 pool1;
  std::vector<std::size_t> pool1_argmax;
  Tensor3 conv2_pre;
  Tensor3 pool2;
  std::vector<std::size_t> pool2_argmax;
  Vector fc1_pre;
  Vector fc1_out;  // after relu and dropout
  std::vector<std::uint8_t> fc1_mask;
  Vector fc2_pre;
  Vector fc2_out;
  std::vector<std::uint8_t> fc2_mask;
  Vector out_pre;
  Vector output;  // sigmoid outputs in (0, 1)
};

/// Fan-in scaled uniform weights U(-a, a) with a = sqrt(3 / fan_in) (unit
/// variance pre-activations for unit-variance inputs); biases zero.
NetworkParams init_params(const Architecture& arch, Rng& rng);

/// `rng` drives the dropout masks and is only consumed when mode == kTrain.
ForwardTrace network_forward(const Tensor3& input, const NetworkParams& params, Mode mode, Rng& rng);
ForwardTrace network_forward(const GrayImage& image, const NetworkParams& params, Mode mode, Rng& rng);

/// Inference-mode convenience wrapper returning only the sigmoid outputs.
Vector network_infer(const Tensor3& input, const NetworkParams& params);

/// Adds d(bce_loss)/d(params) for one sample to `grads`. Returns the loss.
double network_backward_accumulate(const ForwardTrace& trace, std::span<const double> target,
                                   const NetworkParams& params, NetworkParams& grads);

NetworkParams network_backward(const ForwardTrace& trace, std::span<const double> target,
                               const NetworkParams& params);

// Versioned little-endian binary format; see docs/formats.md.
void save_params(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_params(const std::filesystem::path& path);
std::vector<unsigned char> encode_params(const NetworkParams& params);
NetworkParams decode_params(std::span<const unsigned char> bytes);

}  // namespace mebface
