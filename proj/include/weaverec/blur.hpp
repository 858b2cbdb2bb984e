#pragma once

#include <vector>

#include "weaverec/dataset_io.hpp"

namespace weaverec {

// Truncated 2D Gaussian, weights proportional to exp(-(x^2+y^2)/(2 sigma^2))
// at integer offsets, radius = ceil(3 sigma), normalized to unit sum.
struct GaussianKernel {
  double sigma = 0.0;
  int radius = 0;
  std::vector<double> weights;  // (2*radius+1)^2, row-major

  int size() const { return 2 * radius + 1; }
  double at(int dy, int dx) const {
    return weights[static_cast<std::size_t>(dy + radius) * size() + (dx + radius)];
  }
};

GaussianKernel build_kernel(double sigma);

// 2D convolution with edge-replication padding. Implemented as two separable
// 1D passes (identical result for a Gaussian); output clamped to [0,1].
GreyFrame blur(const GreyFrame& frame, const GaussianKernel& kernel);

}  // namespace weaverec
