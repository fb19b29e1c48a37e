#include "mebface/illumination.hpp"

#include <algorithm>
#include <cmath>

namespace mebface {
namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;
  return kernel;
}

// Mirror index into [0, n): ... c b a | a b c ... c | c b a ...
std::size_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
  if (sigma <= 0.0) return image;
  const auto kernel = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const std::size_t rows = image.rows();
  const std::size_t cols = image.cols();

  // 1D pass over a mirrored copy of `line` written into `out`
  std::vector<double> padded;
  auto blur_line = [&](auto&& load, std::size_t n, auto&& store) {
    padded.resize(n + 2 * static_cast<std::size_t>(radius));
    for (std::ptrdiff_t i = -radius; i < static_cast<std::ptrdiff_t>(n) + radius; ++i) {
      padded[static_cast<std::size_t>(i + radius)] = load(reflect(i, static_cast<std::ptrdiff_t>(n)));
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * padded[i + k];
      store(i, acc);
    }
  };

  GrayImage horizontal(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    blur_line([&](std::size_t c) { return image.at(r, c); }, cols,
              [&](std::size_t c, double v) { horizontal.at(r, c) = v; });
  }
  GrayImage out(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    blur_line([&](std::size_t r) { return horizontal.at(r, c); }, rows,
              [&](std::size_t r, double v) { out.at(r, c) = v; });
  }
  return out;
}

GrayImage illum_normalize(const GrayImage& image, const IlluminationParams& params) {
  GrayImage gamma(image.rows(), image.cols());
  std::transform(image.pixels().begin(), image.pixels().end(), gamma.pixels().begin(),
                 [&](double v) { return std::pow(std::max(v, 0.0), params.gamma); });

  const GrayImage inner = gaussian_blur(gamma, params.sigma_inner);
  const GrayImage outer = gaussian_blur(gamma, params.sigma_outer);
  std::vector<double> x(image.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = inner.pixels()[i] - outer.pixels()[i];

  GrayImage out(image.rows(), image.cols());
  // A flat image leaves only rounding noise from the two blur passes.
  const double peak = std::abs(*std::max_element(x.begin(), x.end(), [](double l, double r) {
    return std::abs(l) < std::abs(r);
  }));
  if (peak < 1e-10) return out;

  const auto n = static_cast<double>(x.size());
  const double a = params.alpha;
  double first = 0.0;
  for (double v : x) first += std::pow(std::abs(v), a);
  first = std::pow(first / n, 1.0 / a);
  if (first > 0.0) {
    for (double& v : x) v /= first;
  }
  double second = 0.0;
  for (double v : x) second += std::pow(std::min(params.tau, std::abs(v)), a);
  second = std::pow(second / n, 1.0 / a);
  if (second > 0.0) {
    for (double& v : x) v /= second;
  }
  for (double& v : x) v = params.tau * std::tanh(v / params.tau);

  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double low = *lo;
  const double range = *hi - *lo;
  if (range > 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) out.pixels()[i] = (x[i] - low) / range;
  }
  return out;
}

}  // namespace mebface
