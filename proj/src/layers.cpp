#include "mebface/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mebface {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

void check_conv_shapes(const Tensor3& input, const ConvLayerParams& params) {
  if (input.maps() != params.in_maps) {
    throw ShapeError("conv: input has " + std::to_string(input.maps()) + " maps, filter bank expects " +
                     std::to_string(params.in_maps));
  }
  if (params.filter_rows > input.rows() || params.filter_cols > input.cols()) {
    throw ShapeError("conv: filter larger than input " + input.shape_string());
  }
  if (params.filters.size() != params.out_maps * params.patch_size() ||
      params.biases.size() != params.out_maps) {
    throw ShapeError("conv: inconsistent parameter buffers");
  }
}

// Unrolls every receptive field into a column: rows are (in_map, r, c),
// columns are output positions in row-major order.
RowMatrix im2col(const Tensor3& input, std::size_t fr, std::size_t fc) {
  const std::size_t out_rows = input.rows() - fr + 1;
  const std::size_t out_cols = input.cols() - fc + 1;
  RowMatrix cols(static_cast<Eigen::Index>(input.maps() * fr * fc),
                 static_cast<Eigen::Index>(out_rows * out_cols));
  Eigen::Index row = 0;
  for (std::size_t m = 0; m < input.maps(); ++m) {
    for (std::size_t r = 0; r < fr; ++r) {
      for (std::size_t c = 0; c < fc; ++c, ++row) {
        double* dst = cols.row(row).data();
        for (std::size_t y = 0; y < out_rows; ++y) {
          const double* src = input.data() + input.index(m, y + r, c);
          std::copy(src, src + out_cols, dst + y * out_cols);
        }
      }
    }
  }
  return cols;
}

void col2im_add(const RowMatrix& cols, std::size_t fr, std::size_t fc, Tensor3& out) {
  const std::size_t out_rows = out.rows() - fr + 1;
  const std::size_t out_cols = out.cols() - fc + 1;
  Eigen::Index row = 0;
  for (std::size_t m = 0; m < out.maps(); ++m) {
    for (std::size_t r = 0; r < fr; ++r) {
      for (std::size_t c = 0; c < fc; ++c, ++row) {
        const double* src = cols.row(row).data();
        for (std::size_t y = 0; y < out_rows; ++y) {
          double* dst = &out(m, y + r, c);
          const double* s = src + y * out_cols;
          for (std::size_t x = 0; x < out_cols; ++x) dst[x] += s[x];
        }
      }
    }
  }
}

}  // namespace

ConvLayerParams::ConvLayerParams(std::size_t out, std::size_t in, std::size_t rows, std::size_t cols)
    : out_maps(out),
      in_maps(in),
      filter_rows(rows),
      filter_cols(cols),
      filters(out * in * rows * cols, 0.0),
      biases(out, 0.0) {
  if (out == 0 || in == 0 || rows == 0 || cols == 0) {
    throw ShapeError("conv layer dimensions must be positive");
  }
}

DenseLayerParams::DenseLayerParams(std::size_t out, std::size_t in)
    : out_dim(out), in_dim(in), weights(out * in, 0.0), biases(out, 0.0) {
  if (out == 0 || in == 0) throw ShapeError("dense layer dimensions must be positive");
}

Tensor3 conv_forward(const Tensor3& input, const ConvLayerParams& params) {
  check_conv_shapes(input, params);
  const std::size_t out_rows = input.rows() - params.filter_rows + 1;
  const std::size_t out_cols = input.cols() - params.filter_cols + 1;
  Tensor3 output(params.out_maps, out_rows, out_cols);

  const RowMatrix cols = im2col(input, params.filter_rows, params.filter_cols);
  ConstMatrixMap weights(params.filters.data(), static_cast<Eigen::Index>(params.out_maps),
                         static_cast<Eigen::Index>(params.patch_size()));
  MatrixMap out(output.data(), static_cast<Eigen::Index>(params.out_maps),
                static_cast<Eigen::Index>(out_rows * out_cols));
  out.noalias() = weights * cols;
  for (std::size_t j = 0; j < params.out_maps; ++j) {
    out.row(static_cast<Eigen::Index>(j)).array() += params.biases[j];
  }
  return output;
}

void conv_backward(const Tensor3& input, const ConvLayerParams& params, const Tensor3& grad_output,
                   ConvLayerParams& grads, Tensor3* grad_input) {
  check_conv_shapes(input, params);
  const std::size_t out_rows = input.rows() - params.filter_rows + 1;
  const std::size_t out_cols = input.cols() - params.filter_cols + 1;
  if (grad_output.maps() != params.out_maps || grad_output.rows() != out_rows ||
      grad_output.cols() != out_cols) {
    throw ShapeError("conv backward: gradient shape " + grad_output.shape_string() + " mismatch");
  }
  if (grads.filters.size() != params.filters.size() || grads.biases.size() != params.biases.size()) {
    throw ShapeError("conv backward: gradient buffer mismatch");
  }

  const RowMatrix cols = im2col(input, params.filter_rows, params.filter_cols);
  const auto positions = static_cast<Eigen::Index>(out_rows * out_cols);
  const auto out_maps = static_cast<Eigen::Index>(params.out_maps);
  const auto patch = static_cast<Eigen::Index>(params.patch_size());
  ConstMatrixMap g(grad_output.data(), out_maps, positions);

  MatrixMap dw(grads.filters.data(), out_maps, patch);
  dw.noalias() += g * cols.transpose();
  VectorMap db(grads.biases.data(), out_maps);
  db += g.rowwise().sum();

  if (grad_input != nullptr) {
    ConstMatrixMap weights(params.filters.data(), out_maps, patch);
    const RowMatrix dcols = weights.transpose() * g;
    *grad_input = Tensor3(input.maps(), input.rows(), input.cols());
    col2im_add(dcols, params.filter_rows, params.filter_cols, *grad_input);
  }
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

Tensor3 relu(const Tensor3& x) {
  Tensor3 out = x;
  for (double& v : out.values()) v = relu(v);
  return out;
}

Vector relu(std::span<const double> x) {
  Vector out(x.begin(), x.end());
  for (double& v : out) v = relu(v);
  return out;
}

void relu_backward(std::span<const double> pre_activation, std::span<double> grad) {
  if (pre_activation.size() != grad.size()) throw ShapeError("relu backward: size mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(pre_activation[i] > 0.0)) grad[i] = 0.0;
  }
}

PoolResult maxpool_forward(const Tensor3& input) {
  if (input.rows() < 2 || input.cols() < 2) {
    throw ShapeError("maxpool: input " + input.shape_string() + " smaller than 2x2 window");
  }
  const std::size_t out_rows = input.rows() / 2;
  const std::size_t out_cols = input.cols() / 2;
  PoolResult result{Tensor3(input.maps(), out_rows, out_cols), {}};
  result.argmax.resize(result.output.size());
  std::size_t k = 0;
  for (std::size_t m = 0; m < input.maps(); ++m) {
    for (std::size_t y = 0; y < out_rows; ++y) {
      for (std::size_t x = 0; x < out_cols; ++x, ++k) {
        std::size_t best = input.index(m, 2 * y, 2 * x);
        double best_value = input.data()[best];
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = input.index(m, 2 * y + dy, 2 * x + dx);
            // strict '>' keeps the first maximum in scan order
            if (input.data()[idx] > best_value) {
              best = idx;
              best_value = input.data()[idx];
            }
          }
        }
        result.output.data()[k] = best_value;
        result.argmax[k] = best;
      }
    }
  }
  return result;
}

Tensor3 maxpool_backward(const Tensor3& grad_output, std::span<const std::size_t> argmax,
                         std::size_t in_maps, std::size_t in_rows, std::size_t in_cols) {
  if (argmax.size() != grad_output.size()) throw ShapeError("maxpool backward: index count mismatch");
  Tensor3 grad_input(in_maps, in_rows, in_cols);
  for (std::size_t k = 0; k < argmax.size(); ++k) {
    if (argmax[k] >= grad_input.size()) throw ShapeError("maxpool backward: index out of range");
    grad_input.data()[argmax[k]] += grad_output.data()[k];
  }
  return grad_input;
}

Vector dense_forward(std::span<const double> x, const DenseLayerParams& params) {
  if (x.size() != params.in_dim) {
    throw ShapeError("dense: input length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(params.in_dim));
  }
  Vector out(params.biases);
  ConstMatrixMap w(params.weights.data(), static_cast<Eigen::Index>(params.out_dim),
                   static_cast<Eigen::Index>(params.in_dim));
  VectorMap(out.data(), static_cast<Eigen::Index>(out.size())).noalias() +=
      w * ConstVectorMap(x.data(), static_cast<Eigen::Index>(x.size()));
  return out;
}

Vector dense_backward(std::span<const double> x, const DenseLayerParams& params,
                      std::span<const double> grad_output, DenseLayerParams& grads) {
  if (x.size() != params.in_dim || grad_output.size() != params.out_dim ||
      grads.weights.size() != params.weights.size()) {
    throw ShapeError("dense backward: size mismatch");
  }
  const auto out_dim = static_cast<Eigen::Index>(params.out_dim);
  const auto in_dim = static_cast<Eigen::Index>(params.in_dim);
  ConstVectorMap g(grad_output.data(), out_dim);
  ConstVectorMap xv(x.data(), in_dim);
  MatrixMap(grads.weights.data(), out_dim, in_dim).noalias() += g * xv.transpose();
  VectorMap(grads.biases.data(), out_dim) += g;

  Vector dx(params.in_dim);
  ConstMatrixMap w(params.weights.data(), out_dim, in_dim);
  VectorMap(dx.data(), in_dim).noalias() = w.transpose() * g;
  return dx;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return sigmoid(v); });
  return out;
}

Vector softmax(std::span<const double> x) {
  if (x.empty()) return {};
  const double shift = *std::max_element(x.begin(), x.end());
  Vector out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - shift);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double bce_loss(std::span<const double> outputs, std::span<const double> targets) {
  if (outputs.size() != targets.size()) {
    throw ShapeError("bce_loss: " + std::to_string(outputs.size()) + " outputs vs " +
                     std::to_string(targets.size()) + " targets");
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    const double t = std::clamp(outputs[j], kLogClamp, 1.0 - kLogClamp);
    loss -= targets[j] * std::log(t) + (1.0 - targets[j]) * std::log(1.0 - t);
  }
  return loss;
}

double ce_loss(std::span<const double> outputs, std::span<const double> labels) {
  if (outputs.size() != labels.size()) throw ShapeError("ce_loss: length mismatch");
  double loss = 0.0;
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    if (labels[j] == 0.0) continue;
    loss -= labels[j] * std::log(std::clamp(outputs[j], kLogClamp, 1.0));
  }
  return loss;
}

DropoutResult dropout(std::span<const double> x, double p, Rng& rng, Mode mode) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: p must lie in [0, 1)");
  DropoutResult result{Vector(x.begin(), x.end()), {}};
  if (mode == Mode::kInfer) return result;
  result.mask.resize(x.size());
  const double scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool keep = !(rng.uniform() < p);
    result.mask[i] = keep ? 1 : 0;
    result.output[i] = keep ? x[i] * scale : 0.0;
  }
  return result;
}

void dropout_backward(std::span<const std::uint8_t> mask, double p, std::span<double> grad) {
  if (mask.size() != grad.size()) throw ShapeError("dropout backward: mask size mismatch");
  const double scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = mask[i] ? grad[i] * scale : 0.0;
}

}  // namespace mebface
