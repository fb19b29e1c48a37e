#include "mebface/network.hpp"

#include <cmath>
#include <stdexcept>

namespace mebface {

Architecture Architecture::reference(std::size_t code_bits) {
  Architecture arch;
  arch.code_bits = code_bits;
  return arch;
}

void Architecture::validate() const {
  auto fail = [](const std::string& why) { throw ShapeError("architecture: " + why); };
  if (input_size == 0 || conv1_maps == 0 || conv2_maps == 0 || conv1_filter == 0 ||
      conv2_filter == 0 || fc1_units == 0 || fc2_units == 0 || code_bits == 0) {
    fail("all sizes must be positive");
  }
  if (conv1_filter > input_size) fail("conv1 filter larger than input");
  if (conv1_out() < 2) fail("conv1 output too small to pool");
  if (conv2_filter > pool1_out()) fail("conv2 filter larger than pooled map");
  if (conv2_out() < 2) fail("conv2 output too small to pool");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
}

std::vector<std::string> Architecture::shape_chain() const {
  validate();
  auto cube = [](std::size_t d, std::size_t n) {
    return std::to_string(d) + "x" + std::to_string(n) + "x" + std::to_string(n);
  };
  return {cube(conv1_maps, conv1_out()), cube(conv1_maps, pool1_out()),
          cube(conv2_maps, conv2_out()), cube(conv2_maps, pool2_out()),
          std::to_string(flatten_size()), std::to_string(fc1_units),
          std::to_string(fc2_units),     std::to_string(code_bits)};
}

NetworkParams NetworkParams::zeros(const Architecture& arch) {
  arch.validate();
  NetworkParams p;
  p.arch = arch;
  p.conv1 = ConvLayerParams(arch.conv1_maps, 1, arch.conv1_filter, arch.conv1_filter);
  p.conv2 = ConvLayerParams(arch.conv2_maps, arch.conv1_maps, arch.conv2_filter, arch.conv2_filter);
  p.fc1 = DenseLayerParams(arch.fc1_units, arch.flatten_size());
  p.fc2 = DenseLayerParams(arch.fc2_units, arch.fc1_units);
  p.out = DenseLayerParams(arch.code_bits, arch.fc2_units);
  return p;
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for_each_buffer([&](std::span<const double> b) { n += b.size(); });
  return n;
}

void NetworkParams::for_each_buffer(const std::function<void(std::span<double>)>& fn) {
  fn(conv1.filters);
  fn(conv1.biases);
  fn(conv2.filters);
  fn(conv2.biases);
  for (DenseLayerParams* layer : {&fc1, &fc2, &out}) {
    fn(layer->weights);
    fn(layer->biases);
  }
}

void NetworkParams::for_each_buffer(const std::function<void(std::span<const double>)>& fn) const {
  const_cast<NetworkParams*>(this)->for_each_buffer([&](std::span<double> b) { fn(b); });
}

NetworkParams init_params(const Architecture& arch, Rng& rng) {
  NetworkParams p = NetworkParams::zeros(arch);
  auto fill = [&](Vector& weights, std::size_t fan_in) {
    const double a = std::sqrt(3.0 / static_cast<double>(fan_in));
    for (double& w : weights) w = rng.uniform(-a, a);
  };
  fill(p.conv1.filters, p.conv1.patch_size());
  fill(p.conv2.filters, p.conv2.patch_size());
  fill(p.fc1.weights, p.fc1.in_dim);
  fill(p.fc2.weights, p.fc2.in_dim);
  fill(p.out.weights, p.out.in_dim);
  return p;
}

ForwardTrace network_forward(const Tensor3& input, const NetworkParams& params, Mode mode, Rng& rng) {
  const Architecture& arch = params.arch;
  if (input.maps() != 1 || input.rows() != arch.input_size || input.cols() != arch.input_size) {
    throw ShapeError("network: input " + input.shape_string() + " incompatible with " +
                     std::to_string(arch.input_size) + "x" + std::to_string(arch.input_size) +
                     " architecture");
  }
  ForwardTrace t;
  t.mode = mode;
  t.input = input;

  t.conv1_pre = conv_forward(input, params.conv1);
  auto pooled = maxpool_forward(relu(t.conv1_pre));
  t.pool1 = std::move(pooled.output);
  t.pool1_argmax = std::move(pooled.argmax);

  t.conv2_pre = conv_forward(t.pool1, params.conv2);
  pooled = maxpool_forward(relu(t.conv2_pre));
  t.pool2 = std::move(pooled.output);
  t.pool2_argmax = std::move(pooled.argmax);

  t.fc1_pre = dense_forward(t.pool2.values(), params.fc1);
  auto dropped = dropout(relu(t.fc1_pre), arch.dropout, rng, mode);
  t.fc1_out = std::move(dropped.output);
  t.fc1_mask = std::move(dropped.mask);

  t.fc2_pre = dense_forward(t.fc1_out, params.fc2);
  dropped = dropout(relu(t.fc2_pre), arch.dropout, rng, mode);
  t.fc2_out = std::move(dropped.output);
  t.fc2_mask = std::move(dropped.mask);

  t.out_pre = dense_forward(t.fc2_out, params.out);
  t.output = sigmoid(t.out_pre);
  return t;
}

ForwardTrace network_forward(const GrayImage& image, const NetworkParams& params, Mode mode, Rng& rng) {
  return network_forward(to_tensor(image), params, mode, rng);
}

Vector network_infer(const Tensor3& input, const NetworkParams& params) {
  Rng unused(0);
  return network_forward(input, params, Mode::kInfer, unused).output;
}

double network_backward_accumulate(const ForwardTrace& trace, std::span<const double> target,
                                   const NetworkParams& params, NetworkParams& grads) {
  const Architecture& arch = params.arch;
  if (trace.output.size() != arch.code_bits || target.size() != arch.code_bits) {
    throw ShapeError("backward: output/target length does not match code_bits");
  }
  if (trace.conv1_pre.maps() != arch.conv1_maps || trace.pool2.size() != arch.flatten_size() ||
      !(grads.arch == arch)) {
    throw ShapeError("backward: trace or gradient buffers do not match parameters");
  }
  const bool train = trace.mode == Mode::kTrain;

  // sigmoid + binary cross-entropy: dL/dz = t - c
  Vector grad(arch.code_bits);
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = trace.output[j] - target[j];

  grad = dense_backward(trace.fc2_out, params.out, grad, grads.out);
  if (train) dropout_backward(trace.fc2_mask, arch.dropout, grad);
  relu_backward(trace.fc2_pre, grad);

  grad = dense_backward(trace.fc1_out, params.fc2, grad, grads.fc2);
  if (train) dropout_backward(trace.fc1_mask, arch.dropout, grad);
  relu_backward(trace.fc1_pre, grad);

  grad = dense_backward(trace.pool2.values(), params.fc1, grad, grads.fc1);
  Tensor3 grad_pool2(trace.pool2.maps(), trace.pool2.rows(), trace.pool2.cols());
  std::copy(grad.begin(), grad.end(), grad_pool2.data());

  Tensor3 grad_conv2 = maxpool_backward(grad_pool2, trace.pool2_argmax, trace.conv2_pre.maps(),
                                        trace.conv2_pre.rows(), trace.conv2_pre.cols());
  relu_backward(trace.conv2_pre.values(), grad_conv2.values());
  Tensor3 grad_pool1;
  conv_backward(trace.pool1, params.conv2, grad_conv2, grads.conv2, &grad_pool1);

  Tensor3 grad_conv1 = maxpool_backward(grad_pool1, trace.pool1_argmax, trace.conv1_pre.maps(),
                                        trace.conv1_pre.rows(), trace.conv1_pre.cols());
  relu_backward(trace.conv1_pre.values(), grad_conv1.values());
  conv_backward(trace.input, params.conv1, grad_conv1, grads.conv1, nullptr);

  return bce_loss(trace.output, target);
}

NetworkParams network_backward(const ForwardTrace& trace, std::span<const double> target,
                               const NetworkParams& params) {
  NetworkParams grads = NetworkParams::zeros(params.arch);
  network_backward_accumulate(trace, target, params, grads);
  return grads;
}

}  // namespace mebface
