// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels_impl.hpp"

#include <cstdlib>

namespace maskforge::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void absdiff_threshold_rgb(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out,
                           std::size_t pixels, int threshold) {
  for (std::size_t p = 0; p < pixels; ++p) {
    int m = 0;
    for (int c = 0; c < 3; ++c) {
      const int d = std::abs(int(a[3 * p + c]) - int(b[3 * p + c]));
      if (d > m) m = d;
    }
    out[p] = m >= threshold ? 255 : 0;
  }
}

Counts4 confusion(const std::uint8_t* pred, const std::uint8_t* gt, std::size_t n) {
  Counts4 c{0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    if (p && g) ++c[0];
    else if (p) ++c[1];
    else if (g) ++c[2];
    else ++c[3];
  }
  return c;
}

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) k += data[i] != 0;
  return k;
}

}  // namespace maskforge::kernels::scalar
