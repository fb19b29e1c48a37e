#pragma once

#include "mebface/image.hpp"

namespace mebface {

/// Parameters of the gamma / difference-of-Gaussians / contrast-equalization
/// chain.
struct IlluminationParams {
  double gamma = 0.2;
  double sigma_inner = 1.0;
  double sigma_outer = 2.0;
  double alpha = 0.1;
  double tau = 10.0;
};

/// Gaussian blur with reflective (mirror, edge pixel repeated) borders.
GrayImage gaussian_blur(const GrayImage& image, double sigma);

/// Gamma correction, DoG filtering, two-pass trimmed contrast equalization
/// with tanh squashing, then min-max rescale to [0, 1]. A flat result maps
/// to all zeros.
GrayImage illum_normalize(const GrayImage& image, const IlluminationParams& params = {});

}  // namespace mebface
