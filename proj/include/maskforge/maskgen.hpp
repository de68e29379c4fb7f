// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <utility>
#include <vector>

#include "maskforge/encoder.hpp"
#include "maskforge/nn.hpp"
#include "maskforge/superres.hpp"
#include "maskforge/tensor.hpp"

namespace maskforge {

/// Per-pixel two-class distribution; class 0 authentic, class 1 tampered.
struct ProbMap {
  int height = 0;
  int width = 0;
  std::vector<double> p;  // [pixels * 2]

  ProbMap() = default;
  ProbMap(int h, int w) : height(h), width(w), p(static_cast<std::size_t>(h) * w * 2, 0.5) {}
  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  double tampered(std::size_t i) const { return p[2 * i + 1]; }
};

/// Softmax over the two logits of every pixel.
ProbMap softmax_logits(const Tensor& logits);

/// First C channels to the original branch, last C to the tampered branch.
std::pair<FeatureEmbedding, FeatureEmbedding> split_embedding(const FeatureEmbedding& joint);

/// Per-pixel MLP (C+2 -> hidden -> 3) mapping a branch embedding plus the
/// cell size to a residual image.
class Decoder {
 public:
  Decoder() = default;
  Decoder(int channels, int hidden);

  /// Small random output layer; every output channel starts at `output_bias`.
  void init(std::mt19937_64& rng, double output_bias = 0.0);
  /// Throws if a cell component lies outside (0, 2].
  Tensor decode(const FeatureEmbedding& z, double cell_h, double cell_w) const;

  struct Trace {
    Tensor input;   // embedding with the two cell channels appended
    Tensor hidden;  // post-ReLU
  };
  Tensor forward(const Tensor& z, double cell_h, double cell_w, Trace* trace) const;
  /// Returns d/dZ (cell channels dropped).
  Tensor backward(const Trace& trace, const Tensor& grad_residual);

  void append_params(const std::string& prefix, std::vector<nn::NamedParam>& out);
  nn::Conv2d& fc1() { return fc1_; }
  nn::Conv2d& fc2() { return fc2_; }

 private:
  int channels_ = 0;
  nn::Conv2d fc1_;
  nn::Conv2d fc2_;
};

/// Bilinear resize with pixel-centre alignment and edge clamping.
Tensor upsample_bilinear(const Tensor& image, int out_h, int out_w);

/// upsample_bilinear(image) + residual; image is LR (scale.base_*) and the
/// residual HR (scale.hr_*).
Tensor upsample_add(const Tensor& image, const Tensor& residual, const ScaleSpec& scale);

/// Linear map from |hr1 - hr2| (3 channels) to two logits.
class DiffHead {
 public:
  DiffHead();
  void init();
  Tensor logits(const Tensor& hr1, const Tensor& hr2, Tensor* abs_diff = nullptr) const;
  ProbMap forward(const Tensor& hr1, const Tensor& hr2) const;
  /// Returns d/d(abs_diff).
  Tensor backward(const Tensor& abs_diff, const Tensor& grad_logits);

  void append_params(std::vector<nn::NamedParam>& out);
  nn::Conv2d& linear() { return linear_; }

 private:
  nn::Conv2d linear_;
};

/// 255 where P(tampered) >= tau.
Mask binarize(const ProbMap& prob, double tau);
/// Nearest-neighbour resize on pixel centres.
Mask resize_nearest(const Mask& mask, int out_h, int out_w);

}  // namespace maskforge
