// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>
#include <vector>

#include "maskforge/tensor.hpp"

namespace maskforge::nn {

/// Learnable tensor with its accumulated gradient.
struct Param {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  explicit Param(std::vector<int> s);
  std::size_t size() const { return value.size(); }
  void zero_grad();
};

struct NamedParam {
  std::string name;
  Param* param;
};

/// 2-D convolution over HWC tensors with zero padding. Weight layout is
/// [ky][kx][in][out]. A 1x1 instance is a per-pixel linear map.
struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  Param weight;
  Param bias;

  Conv2d() = default;
  Conv2d(int in, int out, int k, int s, int p);

  int out_size(int n) const { return (n + 2 * pad - kernel) / stride + 1; }
  Tensor forward(const Tensor& x) const;
  /// Accumulates weight/bias gradients; returns the input gradient unless
  /// `need_input_grad` is false, in which case an empty tensor is returned.
  Tensor backward(const Tensor& x, const Tensor& grad_out, bool need_input_grad = true);

  /// He-normal weights scaled by `gain`, zero bias.
  void init(std::mt19937_64& rng, double gain = 1.0);
  void append_params(const std::string& prefix, std::vector<NamedParam>& out);
};

void relu_inplace(Tensor& t);
/// grad *= (activation > 0)
void relu_backward(const Tensor& activation, Tensor& grad);

}  // namespace maskforge::nn
