#include "weaverec/blur.hpp"

#include <algorithm>
#include <cmath>

namespace weaverec {

GaussianKernel build_kernel(double sigma) {
  if (!(sigma > 0.0)) throw data_error("sigma must be positive");

  GaussianKernel k;
  k.sigma = sigma;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));

  const int size = k.size();
  std::vector<double> one_d(size);
  double sum = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    one_d[i + k.radius] = v;
    sum += v;
  }
  for (double& v : one_d) v /= sum;

  // exp(-(x^2+y^2)/2s^2) separates exactly, so the normalized 2D grid is the
  // outer product of the normalized 1D profile.
  k.weights.resize(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      k.weights[static_cast<std::size_t>(y) * size + x] = one_d[y] * one_d[x];
  return k;
}

GreyFrame blur(const GreyFrame& frame, const GaussianKernel& kernel) {
  frame.validate();
  const int w = frame.width;
  const int h = frame.height;
  const int r = kernel.radius;
  const int size = kernel.size();

  // The kernel is an outer product of one normalized 1D profile; recover it
  // from the center row so the separable passes reproduce the 2D weights.
  std::vector<double> one_d(size);
  double center_row_sum = 0.0;
  for (int i = 0; i < size; ++i) center_row_sum += kernel.at(0, i - r);
  for (int i = 0; i < size; ++i) one_d[i] = kernel.at(0, i - r) / center_row_sum;

  auto clamp_col = [w](int c) { return std::clamp(c, 0, w - 1); };
  auto clamp_row = [h](int rr) { return std::clamp(rr, 0, h - 1); };

  // Horizontal pass with edge replication, then vertical.
  std::vector<double> tmp(frame.intensities.size());
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += one_d[i + r] * frame.at(row, clamp_col(col + i));
      tmp[static_cast<std::size_t>(row) * w + col] = acc;
    }
  }
  GreyFrame out(w, h);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += one_d[i + r] * tmp[static_cast<std::size_t>(clamp_row(row + i)) * w + col];
      out.at(row, col) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace weaverec
