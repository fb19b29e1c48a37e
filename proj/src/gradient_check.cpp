#include "mebface/gradient_check.hpp"

#include <algorithm>
#include <cmath>

namespace mebface {
namespace {

constexpr const char* kBufferNames[] = {"conv1.filters", "conv1.biases", "conv2.filters",
                                        "conv2.biases",  "fc1.weights",  "fc1.biases",
                                        "fc2.weights",   "fc2.biases",   "out.weights",
                                        "out.biases"};

double loss_at(const NetworkParams& params, const Tensor3& input, std::span<const double> target,
               std::uint64_t seed) {
  Rng rng(seed);
  return bce_loss(network_forward(input, params, Mode::kTrain, rng).output, target);
}

}  // namespace

GradientCheckResult gradient_check(const NetworkParams& params, const Tensor3& input,
                                   std::span<const double> target, double epsilon,
                                   std::uint64_t dropout_seed) {
  Rng rng(dropout_seed);
  const ForwardTrace trace = network_forward(input, params, Mode::kTrain, rng);
  const NetworkParams analytic = network_backward(trace, target, params);

  std::vector<std::span<const double>> grad_buffers;
  analytic.for_each_buffer([&](std::span<const double> b) { grad_buffers.push_back(b); });

  GradientCheckResult result;
  NetworkParams probe = params;
  std::size_t buffer_index = 0;
  probe.for_each_buffer([&](std::span<double> buffer) {
    for (std::size_t j = 0; j < buffer.size(); ++j) {
      const double original = buffer[j];
      buffer[j] = original + epsilon;
      const double plus = loss_at(probe, input, target, dropout_seed);
      buffer[j] = original - epsilon;
      const double minus = loss_at(probe, input, target, dropout_seed);
      buffer[j] = original;

      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double a = grad_buffers[buffer_index][j];
      const double err = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-8);
      if (err > result.max_relative_error || result.worst_parameter.empty()) {
        result.max_relative_error = std::max(err, result.max_relative_error);
        result.worst_parameter = std::string(kBufferNames[buffer_index]) + "[" + std::to_string(j) + "]";
      }
      ++result.parameters_checked;
    }
    ++buffer_index;
  });
  return result;
}

Architecture tiny_architecture() {
  Architecture arch;
  arch.input_size = 8;
  arch.conv1_maps = 2;
  arch.conv1_filter = 3;
  arch.conv2_maps = 2;
  arch.conv2_filter = 2;
  arch.fc1_units = 4;
  arch.fc2_units = 4;
  arch.code_bits = 3;
  return arch;
}

GradientCheckCase make_gradient_check_case(std::uint64_t seed, const Architecture& arch) {
  Rng rng(seed);
  GradientCheckCase c{init_params(arch, rng), Tensor3(1, arch.input_size, arch.input_size), {}, 0};
  c.params.for_each_buffer([&](std::span<double> b) {
    // Only bias buffers are all-zero after init_params.
    if (std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; })) {
      for (double& v : b) v = rng.uniform(-0.1, 0.1);
    }
  });
  for (double& v : c.input.values()) v = rng.uniform();
  c.target.resize(arch.code_bits);
  for (double& v : c.target) v = rng.bit() ? 1.0 : 0.0;
  c.dropout_seed = rng.next_u64();
  return c;
}

}  // namespace mebface
