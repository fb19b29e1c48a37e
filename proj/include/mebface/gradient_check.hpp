#pragma once

#include <cstdint>
#include <string>

#include "mebface/network.hpp"

namespace mebface {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
  /// "<buffer>[<index>]" of the worst parameter, e.g. "fc1.weights[3]".
  std::string worst_parameter;
};

/// Compares network_backward against central differences of bce_loss for
/// every parameter. Dropout masks are drawn from Rng(dropout_seed) for the
/// analytic pass and every perturbed pass alike. Relative error is
/// |a - n| / max(|a| + |n|, 1e-8).
GradientCheckResult gradient_check(const NetworkParams& params, const Tensor3& input,
                                   std::span<const double> target, double epsilon = 1e-4,
                                   std::uint64_t dropout_seed = 0);

/// 8x8 input, 2 conv1 maps 3x3, 2 conv2 maps 2x2, fc 4 / 4, K = 3.
Architecture tiny_architecture();

struct GradientCheckCase {
  NetworkParams params;
  Tensor3 input;
  Vector target;
  std::uint64_t dropout_seed = 0;
};

/// Random weights, small random biases, uniform [0,1] input, random 0/1 target.
GradientCheckCase make_gradient_check_case(std::uint64_t seed,
                                           const Architecture& arch = tiny_architecture());

}  // namespace mebface
