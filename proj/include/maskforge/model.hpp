// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskforge/encoder.hpp"
#include "maskforge/ingestion.hpp"
#include "maskforge/maskgen.hpp"
#include "maskforge/nn.hpp"
#include "maskforge/superres.hpp"

namespace maskforge {

struct ModelConfig {
  int channels = 64;
  int decoder_hidden = 64;
  LocalGrid grid{3, 3};
  bool tie_encoders = false;
  MmdKernel mmd_kernel = MmdKernel::linear;
  std::uint64_t init_seed = 0;
  // Initial residual bias: +offset for the original branch, -offset for the
  // tampered one. A nonzero offset gives |hr1 - hr2| a consistent sign at
  // init, so decoder gradients do not cancel across pixels.
  double residual_offset = 0.25;
};

/// Loss terms of one forward/backward pass.
struct LossParts {
  double ce = 0.0;
  double mmd = 0.0;
  double total = 0.0;
};

/// The full original/tampered -> mask network.
class MaskModel {
 public:
  MaskModel() : MaskModel(ModelConfig{}) {}
  explicit MaskModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  struct Trace {
    Padding padding;
    int height = 0;  // unpadded input size
    int width = 0;
    Tensor image[2];  // padded, [0,1]
    Encoder::BackboneTrace backbone[2];
    Tensor z[2];  // encoder outputs Z1, Z2
    ScaleSpec scale;
    SuperResolver::Trace sr;
    Decoder::Trace decoder[2];
    Tensor hr[2];
    Tensor abs_diff;
    Tensor logits;
    ProbMap prob;
    int valid_h = 0;  // HR rows/cols covering the unpadded input
    int valid_w = 0;
  };

  /// Runs the pipeline at scale (rh, rw) on two equal-size H x W x 3 [0,1]
  /// tensors. The returned probability map covers the unpadded area only.
  ProbMap forward(const Tensor& original, const Tensor& tampered, double rh, double rw, Trace* trace) const;

  /// Loss against `target` (valid_h x valid_w) and gradient accumulation.
  /// `grad_scale` multiplies every gradient (batch averaging).
  LossParts backward(Trace& trace, const Mask& target, double lambda_mmd, double grad_scale = 1.0);

  /// Inference: pixel is 255 iff P(tampered) >= tau. For r > 1 the HR map is
  /// resized (nearest) back to the pair's size. Stage failures are rethrown
  /// as "<stage>: <message>".
  Mask predict_mask(const ImagePair& pair, double tau = 0.5, double rh = 1.0, double rw = 1.0) const;

  std::vector<nn::NamedParam> parameters();
  void zero_grad();

  Encoder& encoder() { return encoder_; }
  SuperResolver& superres() { return sr_; }
  Decoder& decoder(int i) { return decoder_[i]; }
  DiffHead& head() { return head_; }

 private:
  ModelConfig config_;
  Encoder encoder_;
  SuperResolver sr_;
  Decoder decoder_[2];
  DiffHead head_;
};

/// Nearest upsample of a native-size mask to the trace's valid HR area.
Mask target_for_trace(const Mask& native, const MaskModel::Trace& trace);

}  // namespace maskforge
