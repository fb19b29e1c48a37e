#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mebface/gradient_check.hpp"
#include "mebface/network.hpp"

namespace mebface {
namespace {

Architecture small_architecture(std::size_t code_bits = 8) {
  Architecture a;
  a.input_size = 16;
  a.conv1_maps = 3;
  a.conv1_filter = 3;
  a.conv2_maps = 4;
  a.conv2_filter = 3;
  a.fc1_units = 12;
  a.fc2_units = 10;
  a.code_bits = code_bits;
  return a;
}

Tensor3 random_input(std::size_t m, Rng& rng) {
  Tensor3 t(1, m, m);
  for (double& v : t.values()) v = rng.uniform();
  return t;
}

TEST(Architecture, ReferenceShapeChain) {
  const auto chain = Architecture::reference(256).shape_chain();
  const std::vector<std::string> want{"32x58x58", "32x29x29", "64x23x23", "64x11x11",
                                      "7744",     "2000",     "2000",     "256"};
  EXPECT_EQ(chain, want);
  EXPECT_EQ(Architecture::reference(1024).shape_chain().back(), "1024");
}

TEST(Architecture, RejectsInputsTooSmallForTheStack) {
  Architecture a = small_architecture();
  a.input_size = 6;
  EXPECT_THROW(a.validate(), ShapeError);
  a = small_architecture();
  a.dropout = 1.0;
  EXPECT_THROW(a.validate(), ShapeError);
}

TEST(Network, ReferenceForwardShapesAndRange) {
  Rng rng(1);
  const auto params = init_params(Architecture::reference(256), rng);
  const auto trace = network_forward(random_input(64, rng), params, Mode::kTrain, rng);
  EXPECT_EQ(trace.conv1_pre.shape_string(), "32x58x58");
  EXPECT_EQ(trace.pool1.shape_string(), "32x29x29");
  EXPECT_EQ(trace.conv2_pre.shape_string(), "64x23x23");
  EXPECT_EQ(trace.pool2.shape_string(), "64x11x11");
  EXPECT_EQ(trace.pool2.size(), 7744u);
  EXPECT_EQ(trace.fc1_out.size(), 2000u);
  EXPECT_EQ(trace.fc2_out.size(), 2000u);
  ASSERT_EQ(trace.output.size(), 256u);
  for (double t : trace.output) {
    EXPECT_GT(t, 0.0);
    EXPECT_LT(t, 1.0);
  }
  EXPECT_EQ(trace.fc1_mask.size(), 2000u);
}

TEST(Network, ZeroParametersGiveOneHalf) {
  Rng rng(2);
  const auto params = NetworkParams::zeros(small_architecture());
  for (double t : network_infer(random_input(16, rng), params)) EXPECT_EQ(t, 0.5);
}

TEST(Network, InferenceIsDeterministic) {
  Rng rng(3);
  const auto params = init_params(small_architecture(), rng);
  const auto x = random_input(16, rng);
  Rng a(10), b(99);
  EXPECT_EQ(network_forward(x, params, Mode::kInfer, a).output,
            network_forward(x, params, Mode::kInfer, b).output);
}

TEST(Network, InferenceEqualsDropoutFreeNetwork) {
  Rng rng(4);
  auto params = init_params(small_architecture(), rng);
  const auto x = random_input(16, rng);
  const auto with_dropout = network_infer(x, params);
  params.arch.dropout = 0.0;
  Rng any(5);
  EXPECT_EQ(with_dropout, network_forward(x, params, Mode::kTrain, any).output);
}

TEST(Network, RejectsWrongInputSize) {
  Rng rng(5);
  const auto params = init_params(small_architecture(), rng);
  EXPECT_THROW(network_infer(Tensor3(1, 17, 17), params), ShapeError);
  EXPECT_THROW(network_infer(Tensor3(2, 16, 16), params), ShapeError);
}

TEST(Backward, MatchesFiniteDifferencesOnTinyNetwork) {
  // 1x8x8 input, 2 filters 3x3, fc 4, K = 3
  const auto c = make_gradient_check_case(7);
  EXPECT_EQ(c.params.arch.code_bits, 3u);
  const auto result = gradient_check(c.params, c.input, c.target, 1e-4, c.dropout_seed);
  EXPECT_EQ(result.parameters_checked, c.params.parameter_count());
  EXPECT_LT(result.max_relative_error, 1e-4) << result.worst_parameter;
}

TEST(Backward, FiniteDifferencesOnSeveralSeedsAndSmallNetwork) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto c = make_gradient_check_case(seed);
    EXPECT_LT(gradient_check(c.params, c.input, c.target, 1e-4, c.dropout_seed).max_relative_error, 1e-4);
  }
  const auto c = make_gradient_check_case(3, small_architecture());
  EXPECT_LT(gradient_check(c.params, c.input, c.target, 1e-4, c.dropout_seed).max_relative_error, 1e-4);
}

TEST(Backward, ZeroInputAndZeroTargetsStayFinite) {
  Rng rng(8);
  const auto params = init_params(small_architecture(), rng);
  const auto trace = network_forward(Tensor3(1, 16, 16), params, Mode::kTrain, rng);
  const auto grads = network_backward(trace, Vector(8, 0.0), params);
  grads.for_each_buffer([](std::span<const double> b) {
    for (double v : b) ASSERT_TRUE(std::isfinite(v));
  });
}

TEST(Backward, SummedIdenticalSamplesDoubleTheGradient) {
  Rng rng(9);
  const auto params = init_params(small_architecture(), rng);
  const auto trace = network_forward(random_input(16, rng), params, Mode::kTrain, rng);
  const Vector target{1, 0, 0, 1, 1, 0, 1, 0};
  const auto once = network_backward(trace, target, params);
  auto twice = NetworkParams::zeros(params.arch);
  network_backward_accumulate(trace, target, params, twice);
  network_backward_accumulate(trace, target, params, twice);
  std::vector<std::span<const double>> a, b;
  once.for_each_buffer([&](std::span<const double> s) { a.push_back(s); });
  twice.for_each_buffer([&](std::span<const double> s) { b.push_back(s); });
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) EXPECT_EQ(b[i][j], 2.0 * a[i][j]);
}

TEST(Backward, RejectsMismatchedTarget) {
  Rng rng(10);
  const auto params = init_params(small_architecture(), rng);
  const auto trace = network_forward(random_input(16, rng), params, Mode::kTrain, rng);
  EXPECT_THROW(network_backward(trace, Vector(7, 0.0), params), ShapeError);
}

TEST(Init, ReproducibleAndZeroBiases) {
  Rng a(11), b(11);
  const auto pa = init_params(small_architecture(), a);
  const auto pb = init_params(small_architecture(), b);
  EXPECT_EQ(pa, pb);
  for (const auto* biases : {&pa.conv1.biases, &pa.conv2.biases, &pa.fc1.biases, &pa.fc2.biases, &pa.out.biases})
    for (double v : *biases) EXPECT_EQ(v, 0.0);
}

TEST(Init, WeightMeanWithinThreeStandardErrors) {
  Architecture arch;
  arch.input_size = 32;
  arch.conv1_maps = 4;
  arch.conv1_filter = 5;
  arch.conv2_maps = 8;
  arch.conv2_filter = 5;
  arch.fc1_units = 512;
  arch.fc2_units = 8;
  arch.code_bits = 8;
  Rng rng(12);
  const auto params = init_params(arch, rng);
  const auto& w = params.fc1.weights;
  ASSERT_GE(w.size(), 100000u);
  const double bound = std::sqrt(3.0 / static_cast<double>(params.fc1.in_dim));
  double sum = 0.0;
  for (double v : w) {
    ASSERT_LE(std::abs(v), bound);
    sum += v;
  }
  const double mean = sum / static_cast<double>(w.size());
  const double standard_error = bound / std::sqrt(3.0) / std::sqrt(static_cast<double>(w.size()));
  EXPECT_LT(std::abs(mean), 3.0 * standard_error);
}

TEST(Serialization, RoundTripsBitExactly) {
  Rng rng(13);
  auto params = init_params(small_architecture(16), rng);
  params.out.biases[3] = -0.0;
  params.fc2.weights[0] = std::nextafter(1.0, 2.0);
  const auto bytes = encode_params(params);
  const auto back = decode_params(bytes);
  EXPECT_EQ(encode_params(back), bytes);
  EXPECT_EQ(back.arch, params.arch);
  EXPECT_TRUE(std::signbit(back.out.biases[3]));

  const auto path = std::filesystem::temp_directory_path() / "mebface_params_roundtrip.bin";
  save_params(params, path);
  EXPECT_EQ(encode_params(load_params(path)), bytes);
  std::filesystem::remove(path);
}

TEST(Serialization, LayoutStartsWithMagicAndLittleEndianDescriptor) {
  const auto bytes = encode_params(NetworkParams::zeros(small_architecture()));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "MEBNET01");
  EXPECT_EQ(bytes[8], 16);  // input_size, low byte first
  for (int i = 9; i < 16; ++i) EXPECT_EQ(bytes[i], 0);
  EXPECT_EQ(bytes.size(), 8 + 8 * 8 + 8 + 8 + 8 * NetworkParams::zeros(small_architecture()).parameter_count());
}

TEST(Serialization, RejectsCorruptInput) {
  auto bytes = encode_params(NetworkParams::zeros(small_architecture()));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_params(truncated), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_params(bad_magic), FormatError);
  auto bad_arch = bytes;
  bad_arch[8] = 2;  // input 2x2 cannot hold the conv stack
  EXPECT_THROW(decode_params(bad_arch), FormatError);
  EXPECT_THROW(load_params("/nonexistent/params.bin"), FileError);
}

}  // namespace
}  // namespace mebface
