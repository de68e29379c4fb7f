// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "maskforge/nn.hpp"
#include "maskforge/tensor.hpp"

namespace maskforge {

enum class Branch { original, tampered };
Branch parse_branch(const std::string& s);
enum class EmbeddingSource { original, tampered, joint };

struct FeatureEmbedding {
  Tensor data;
  EmbeddingSource source = EmbeddingSource::original;
};

enum class MmdKernel { linear, rbf };
const char* mmd_kernel_name(MmdKernel k);
MmdKernel parse_mmd_kernel(const std::string& s);

/// Rows/columns of reflection padding appended at the bottom/right edge.
struct Padding {
  int bottom = 0;
  int right = 0;
};

/// Reflect-pads an HWC tensor so both spatial dims are multiples of `multiple`.
Tensor reflect_pad(const Tensor& image, int multiple, Padding* padding);

/// FCN feature extractor (four 3x3 conv blocks, total stride 4) shared by both
/// images, followed by per-branch 1x1 encoder heads E1 (original) and E2
/// (tampered).
class Encoder {
 public:
  static constexpr int kStride = 4;
  static constexpr int kBlocks = 4;

  Encoder() = default;
  Encoder(int channels, bool tie_encoders);

  int channels() const { return channels_; }
  bool tied() const { return tied_; }

  void init(std::mt19937_64& rng);

  /// `image` is H x W x 3 in [0,1] with H, W divisible by kStride (use
  /// reflect_pad otherwise). Throws on non-finite activations.
  FeatureEmbedding extract_features(const Tensor& image) const;
  FeatureEmbedding encode(const FeatureEmbedding& features, Branch branch) const;

  // Training path. Activations after each block are kept in `acts`.
  struct BackboneTrace {
    Tensor input;
    std::array<Tensor, kBlocks> acts;
  };
  Tensor backbone_forward(const Tensor& image, BackboneTrace* trace) const;
  void backbone_backward(const BackboneTrace& trace, Tensor grad_features, bool need_input_grad = false);
  Tensor encode_forward(const Tensor& features, Branch branch) const;
  /// Returns the gradient w.r.t. the backbone features.
  Tensor encode_backward(const Tensor& features, const Tensor& grad_out, Branch branch);

  void append_params(std::vector<nn::NamedParam>& out);

  // exposed for tests that set weights by hand
  std::array<nn::Conv2d, kBlocks>& backbone() { return backbone_; }
  nn::Conv2d& head(Branch b) { return (b == Branch::original || tied_) ? enc1_ : enc2_; }

 private:
  int channels_ = 0;
  bool tied_ = false;
  std::array<nn::Conv2d, kBlocks> backbone_;
  nn::Conv2d enc1_;
  nn::Conv2d enc2_;
};

/// Squared MMD between two embeddings viewed as sample sets of H*W vectors in
/// R^C. Linear kernel: squared norm of the mean difference. RBF kernel:
/// biased estimate with k(a,b) = exp(-|a-b|^2 / h), h the median pairwise
/// squared distance of the pooled samples.
double mmd(const FeatureEmbedding& z1, const FeatureEmbedding& z2, MmdKernel kernel = MmdKernel::linear);
/// Same value; writes d(mmd)/dZ1 and d(mmd)/dZ2 when the pointers are set.
/// The RBF bandwidth is held constant for the gradient.
double mmd_with_grad(const Tensor& z1, const Tensor& z2, MmdKernel kernel, Tensor* grad1, Tensor* grad2);

/// Channels [0, C) from z1 and [C, 2C) from z2.
FeatureEmbedding concat_embeddings(const FeatureEmbedding& z1, const FeatureEmbedding& z2);

}  // namespace maskforge
