// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "maskforge/kernels.hpp"

namespace maskforge::nn {

Param::Param(std::vector<int> s) : shape(std::move(s)) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                        [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  value.assign(n, 0.0);
  grad.assign(n, 0.0);
}

void Param::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

Conv2d::Conv2d(int in, int out, int k, int s, int p)
    : in_channels(in), out_channels(out), kernel(k), stride(s), pad(p),
      weight({k, k, in, out}), bias({out}) {}

Tensor Conv2d::forward(const Tensor& x) const {
  if (x.channels != in_channels)
    throw std::invalid_argument("conv expects " + std::to_string(in_channels) + " channels, got " +
                                std::to_string(x.channels));
  const int oh = out_size(x.height), ow = out_size(x.width);
  Tensor y(oh, ow, out_channels);
  const auto& k = kernels::active();
  const std::size_t oc = out_channels;
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      double* out = y.at(oy, ox);
      std::copy(bias.value.begin(), bias.value.end(), out);
      for (int ky = 0; ky < kernel; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= x.height) continue;
        for (int kx = 0; kx < kernel; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= x.width) continue;
          const double* in = x.at(iy, ix);
          const double* w = weight.value.data() + static_cast<std::size_t>(ky * kernel + kx) * in_channels * oc;
          for (int ci = 0; ci < in_channels; ++ci) {
            if (in[ci] != 0.0) k.axpy(in[ci], w + ci * oc, out, oc);
          }
        }
      }
    }
  return y;
}

Tensor Conv2d::backward(const Tensor& x, const Tensor& grad_out, bool need_input_grad) {
  const int oh = out_size(x.height), ow = out_size(x.width);
  if (grad_out.height != oh || grad_out.width != ow || grad_out.channels != out_channels)
    throw std::invalid_argument("conv backward: gradient shape mismatch");
  Tensor gx;
  if (need_input_grad) gx = Tensor(x.height, x.width, in_channels);
  const auto& k = kernels::active();
  const std::size_t oc = out_channels;
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      const double* g = grad_out.at(oy, ox);
      for (std::size_t c = 0; c < oc; ++c) bias.grad[c] += g[c];
      for (int ky = 0; ky < kernel; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= x.height) continue;
        for (int kx = 0; kx < kernel; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= x.width) continue;
          const double* in = x.at(iy, ix);
          const std::size_t tap = static_cast<std::size_t>(ky * kernel + kx) * in_channels * oc;
          const double* w = weight.value.data() + tap;
          double* gw = weight.grad.data() + tap;
          double* gin = need_input_grad ? gx.at(iy, ix) : nullptr;
          for (int ci = 0; ci < in_channels; ++ci) {
            if (in[ci] != 0.0) k.axpy(in[ci], g, gw + ci * oc, oc);
            if (gin) gin[ci] += k.dot(w + ci * oc, g, oc);
          }
        }
      }
    }
  return gx;
}

void Conv2d::init(std::mt19937_64& rng, double gain) {
  const double fan_in = static_cast<double>(kernel * kernel * in_channels);
  std::normal_distribution<double> n(0.0, gain * std::sqrt(2.0 / fan_in));
  for (double& w : weight.value) w = n(rng);
  std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

void Conv2d::append_params(const std::string& prefix, std::vector<NamedParam>& out) {
  out.push_back({prefix + ".weight", &weight});
  out.push_back({prefix + ".bias", &bias});
}

void relu_inplace(Tensor& t) {
  for (double& v : t.data) v = v < 0.0 ? 0.0 : v;  // NaN passes through
}

void relu_backward(const Tensor& activation, Tensor& grad) {
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    if (!(activation.data[i] > 0.0)) grad.data[i] = 0.0;
}

}  // namespace maskforge::nn
