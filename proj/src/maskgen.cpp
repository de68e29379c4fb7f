// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maskforge {

ProbMap softmax_logits(const Tensor& logits) {
  if (logits.channels != 2) throw std::invalid_argument("softmax_logits expects 2 channels");
  ProbMap out(logits.height, logits.width);
  for (std::size_t i = 0; i < logits.pixels(); ++i) {
    const double* l = logits.pixel(i);
    const double m = std::max(l[0], l[1]);
    const double e0 = std::exp(l[0] - m), e1 = std::exp(l[1] - m);
    out.p[2 * i] = e0 / (e0 + e1);
    out.p[2 * i + 1] = e1 / (e0 + e1);
  }
  return out;
}

std::pair<FeatureEmbedding, FeatureEmbedding> split_embedding(const FeatureEmbedding& joint) {
  const Tensor& j = joint.data;
  if (j.channels % 2 != 0) throw std::invalid_argument("split: odd channel count " + std::to_string(j.channels));
  const int c = j.channels / 2;
  FeatureEmbedding a{Tensor(j.height, j.width, c), EmbeddingSource::original};
  FeatureEmbedding b{Tensor(j.height, j.width, c), EmbeddingSource::tampered};
  for (std::size_t p = 0; p < j.pixels(); ++p) {
    std::copy_n(j.pixel(p), c, a.data.pixel(p));
    std::copy_n(j.pixel(p) + c, c, b.data.pixel(p));
  }
  return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------

Decoder::Decoder(int channels, int hidden)
    : channels_(channels), fc1_(channels + 2, hidden, 1, 1, 0), fc2_(hidden, 3, 1, 1, 0) {}

void Decoder::init(std::mt19937_64& rng, double output_bias) {
  fc1_.init(rng);
  fc2_.init(rng, 0.1);
  std::fill(fc2_.bias.value.begin(), fc2_.bias.value.end(), output_bias);
}

Tensor Decoder::forward(const Tensor& z, double cell_h, double cell_w, Trace* trace) const {
  if (z.channels != channels_)
    throw std::invalid_argument("decode expects " + std::to_string(channels_) + " channels, got " +
                                std::to_string(z.channels));
  if (!(cell_h > 0.0 && cell_h <= 2.0 && cell_w > 0.0 && cell_w <= 2.0))
    throw std::invalid_argument("cell must lie in (0, 2]");
  Tensor in(z.height, z.width, channels_ + 2);
  for (std::size_t p = 0; p < z.pixels(); ++p) {
    std::copy_n(z.pixel(p), channels_, in.pixel(p));
    in.pixel(p)[channels_] = cell_h;
    in.pixel(p)[channels_ + 1] = cell_w;
  }
  Tensor h = fc1_.forward(in);
  nn::relu_inplace(h);
  Tensor out = fc2_.forward(h);
  if (trace) {
    trace->input = std::move(in);
    trace->hidden = std::move(h);
  }
  return out;
}

Tensor Decoder::decode(const FeatureEmbedding& z, double cell_h, double cell_w) const {
  return forward(z.data, cell_h, cell_w, nullptr);
}

Tensor Decoder::backward(const Trace& trace, const Tensor& grad_residual) {
  Tensor gh = fc2_.backward(trace.hidden, grad_residual);
  nn::relu_backward(trace.hidden, gh);
  const Tensor gin = fc1_.backward(trace.input, gh);
  Tensor gz(gin.height, gin.width, channels_);
  for (std::size_t p = 0; p < gin.pixels(); ++p) std::copy_n(gin.pixel(p), channels_, gz.pixel(p));
  return gz;
}

void Decoder::append_params(const std::string& prefix, std::vector<nn::NamedParam>& out) {
  fc1_.append_params(prefix + ".fc1", out);
  fc2_.append_params(prefix + ".fc2", out);
}

// ---------------------------------------------------------------------------

Tensor upsample_bilinear(const Tensor& image, int out_h, int out_w) {
  Tensor out(out_h, out_w, image.channels);
  const double sy = static_cast<double>(image.height) / out_h;
  const double sx = static_cast<double>(image.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double ay = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double ax = fx - x0;
      double* o = out.at(y, x);
      const double *p00 = image.at(y0, x0), *p01 = image.at(y0, x1), *p10 = image.at(y1, x0),
                   *p11 = image.at(y1, x1);
      for (int c = 0; c < image.channels; ++c)
        o[c] = (1 - ay) * ((1 - ax) * p00[c] + ax * p01[c]) + ay * ((1 - ax) * p10[c] + ax * p11[c]);
    }
  }
  return out;
}

Tensor upsample_add(const Tensor& image, const Tensor& residual, const ScaleSpec& scale) {
  if (image.height != scale.base_h || image.width != scale.base_w)
    throw std::invalid_argument("upsample_add: image " + image.shape_string() + " does not match scale base");
  if (residual.height != scale.hr_h || residual.width != scale.hr_w || residual.channels != image.channels)
    throw std::invalid_argument("upsample_add: residual " + residual.shape_string() + " does not match HR size");
  Tensor out = upsample_bilinear(image, scale.hr_h, scale.hr_w);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += residual.data[i];
  return out;
}

// ---------------------------------------------------------------------------

DiffHead::DiffHead() : linear_(3, 2, 1, 1, 0) {}

void DiffHead::init() {
  // starts as a soft threshold on the summed channel difference
  for (int c = 0; c < 3; ++c) {
    linear_.weight.value[c * 2 + 0] = -5.0;
    linear_.weight.value[c * 2 + 1] = 5.0;
  }
  linear_.bias.value = {0.5, -0.5};
}

Tensor DiffHead::logits(const Tensor& hr1, const Tensor& hr2, Tensor* abs_diff) const {
  if (!hr1.same_shape(hr2)) throw std::invalid_argument("diff_head: shape mismatch " + hr1.shape_string() +
                                                        " vs " + hr2.shape_string());
  if (hr1.channels != 3) throw std::invalid_argument("diff_head expects 3-channel reconstructions");
  Tensor d(hr1.height, hr1.width, 3);
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = std::abs(hr1.data[i] - hr2.data[i]);
  Tensor l = linear_.forward(d);
  if (abs_diff) *abs_diff = std::move(d);
  return l;
}

ProbMap DiffHead::forward(const Tensor& hr1, const Tensor& hr2) const { return softmax_logits(logits(hr1, hr2)); }

Tensor DiffHead::backward(const Tensor& abs_diff, const Tensor& grad_logits) {
  return linear_.backward(abs_diff, grad_logits);
}

void DiffHead::append_params(std::vector<nn::NamedParam>& out) { linear_.append_params("head", out); }

// ---------------------------------------------------------------------------

Mask binarize(const ProbMap& prob, double tau) {
  Mask m(prob.height, prob.width, MaskSource::model);
  for (std::size_t i = 0; i < prob.pixels(); ++i) m.data[i] = prob.tampered(i) >= tau ? 255 : 0;
  return m;
}

Mask resize_nearest(const Mask& mask, int out_h, int out_w) {
  Mask out(out_h, out_w, mask.source);
  for (int y = 0; y < out_h; ++y) {
    const int sy = std::min(mask.height - 1, static_cast<int>((y + 0.5) * mask.height / out_h));
    for (int x = 0; x < out_w; ++x) {
      const int sx = std::min(mask.width - 1, static_cast<int>((x + 0.5) * mask.width / out_w));
      out.at(y, x) = mask.at(sy, sx);
    }
  }
  return out;
}

}  // namespace maskforge
