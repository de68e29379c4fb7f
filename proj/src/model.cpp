// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maskforge {

namespace {

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + ": " + e.what());
  }
}

constexpr double kLogClamp = 1e-12;

}  // namespace

MaskModel::MaskModel(const ModelConfig& config)
    : config_(config),
      encoder_(config.channels, config.tie_encoders),
      sr_(2 * config.channels, config.grid),
      decoder_{Decoder(config.channels, config.decoder_hidden), Decoder(config.channels, config.decoder_hidden)} {
  std::mt19937_64 rng(config.init_seed);
  encoder_.init(rng);
  sr_.init(rng);
  decoder_[0].init(rng, config.residual_offset);
  decoder_[1].init(rng, -config.residual_offset);
  head_.init();
}

ProbMap MaskModel::forward(const Tensor& original, const Tensor& tampered, double rh, double rw,
                           Trace* trace) const {
  if (!original.same_shape(tampered))
    throw std::invalid_argument("original " + original.shape_string() + " and tampered " +
                                tampered.shape_string() + " differ in shape");
  if (original.channels != 3) throw std::invalid_argument("expected RGB inputs");
  Trace local;
  Trace& t = trace ? *trace : local;
  t.height = original.height;
  t.width = original.width;
  t.image[0] = reflect_pad(original, Encoder::kStride, &t.padding);
  t.image[1] = reflect_pad(tampered, Encoder::kStride, nullptr);
  t.scale = stage("scale", [&] { return make_scale(t.image[0].height, t.image[0].width, rh, rw); });

  const Branch branches[2] = {Branch::original, Branch::tampered};
  for (int i = 0; i < 2; ++i) {
    const Tensor feat = stage("extract_features", [&] { return encoder_.backbone_forward(t.image[i], &t.backbone[i]); });
    t.z[i] = stage("encode", [&] { return encoder_.encode_forward(feat, branches[i]); });
  }
  const FeatureEmbedding z3 = stage("concat_embeddings", [&] {
    return concat_embeddings({t.z[0], EmbeddingSource::original}, {t.z[1], EmbeddingSource::tampered});
  });
  const Tensor joint = stage("superres", [&] { return sr_.forward(z3.data, t.scale, &t.sr); });
  const auto parts = stage("split", [&] { return split_embedding({joint, EmbeddingSource::joint}); });
  const Tensor* branch_z[2] = {&parts.first.data, &parts.second.data};
  for (int i = 0; i < 2; ++i) {
    const Tensor res = stage("decode", [&] {
      return decoder_[i].forward(*branch_z[i], t.scale.cell_h, t.scale.cell_w, &t.decoder[i]);
    });
    t.hr[i] = stage("upsample_add", [&] { return upsample_add(t.image[i], res, t.scale); });
  }
  t.logits = stage("diff_head", [&] { return head_.logits(t.hr[0], t.hr[1], &t.abs_diff); });

  t.valid_h = std::min(t.scale.hr_h, static_cast<int>(std::floor(rh * t.height + 1e-9)));
  t.valid_w = std::min(t.scale.hr_w, static_cast<int>(std::floor(rw * t.width + 1e-9)));
  Tensor cropped(t.valid_h, t.valid_w, 2);
  for (int y = 0; y < t.valid_h; ++y) std::copy_n(t.logits.at(y, 0), 2 * t.valid_w, cropped.at(y, 0));
  t.prob = softmax_logits(cropped);
  return t.prob;
}

LossParts MaskModel::backward(Trace& t, const Mask& target, double lambda_mmd, double grad_scale) {
  if (target.height != t.valid_h || target.width != t.valid_w)
    throw std::invalid_argument("target size does not match the forward pass");
  LossParts loss;
  const std::size_t n = t.prob.pixels();
  Tensor dlogits(t.logits.height, t.logits.width, 2);
  double ce = 0.0;
  for (int y = 0; y < t.valid_h; ++y)
    for (int x = 0; x < t.valid_w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * t.valid_w + x;
      const int cls = target.at(y, x) ? 1 : 0;
      ce -= std::log(std::max(t.prob.p[2 * i + cls], kLogClamp));
      double* g = dlogits.at(y, x);
      g[0] = (t.prob.p[2 * i] - (cls == 0 ? 1.0 : 0.0)) * grad_scale / static_cast<double>(n);
      g[1] = (t.prob.p[2 * i + 1] - (cls == 1 ? 1.0 : 0.0)) * grad_scale / static_cast<double>(n);
    }
  loss.ce = ce / static_cast<double>(n);

  Tensor gz_mmd[2];
  loss.mmd = mmd_with_grad(t.z[0], t.z[1], config_.mmd_kernel, &gz_mmd[0], &gz_mmd[1]);
  loss.total = loss.ce + lambda_mmd * loss.mmd;

  const Tensor dd = head_.backward(t.abs_diff, dlogits);
  Tensor dhr[2] = {Tensor(dd.height, dd.width, 3), Tensor(dd.height, dd.width, 3)};
  for (std::size_t i = 0; i < dd.data.size(); ++i) {
    const double diff = t.hr[0].data[i] - t.hr[1].data[i];
    const double s = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    dhr[0].data[i] = dd.data[i] * s;
    dhr[1].data[i] = -dd.data[i] * s;
  }
  const int c = config_.channels;
  Tensor djoint(t.scale.hr_h, t.scale.hr_w, 2 * c);
  for (int i = 0; i < 2; ++i) {
    const Tensor dz = decoder_[i].backward(t.decoder[i], dhr[i]);
    for (std::size_t p = 0; p < dz.pixels(); ++p) std::copy_n(dz.pixel(p), c, djoint.pixel(p) + i * c);
  }
  const Tensor dz3 = sr_.backward(t.sr, djoint);

  const Branch branches[2] = {Branch::original, Branch::tampered};
  for (int i = 0; i < 2; ++i) {
    Tensor dz(dz3.height, dz3.width, c);
    for (std::size_t p = 0; p < dz.pixels(); ++p) {
      const double* src = dz3.pixel(p) + i * c;
      const double* gm = gz_mmd[i].pixel(p);
      double* dst = dz.pixel(p);
      for (int k = 0; k < c; ++k) dst[k] = src[k] + lambda_mmd * grad_scale * gm[k];
    }
    const Tensor& feat = t.backbone[i].acts[Encoder::kBlocks - 1];
    Tensor dfeat = encoder_.encode_backward(feat, dz, branches[i]);
    encoder_.backbone_backward(t.backbone[i], std::move(dfeat));
  }
  return loss;
}

Mask MaskModel::predict_mask(const ImagePair& pair, double tau, double rh, double rw) const {
  if (!pair.original.same_size(pair.tampered))
    throw std::invalid_argument("pair " + pair.pair_id + " has images of different size");
  const Tensor a = to_unit_tensor(pair.original);
  const Tensor b = to_unit_tensor(pair.tampered);
  Trace t;
  const ProbMap prob = forward(a, b, rh, rw, &t);
  for (double v : prob.p)
    if (!std::isfinite(v)) throw std::runtime_error("diff_head: non-finite probability");
  Mask m = binarize(prob, tau);
  if (m.height != pair.original.height || m.width != pair.original.width)
    m = resize_nearest(m, pair.original.height, pair.original.width);
  m.source = MaskSource::model;
  return m;
}

std::vector<nn::NamedParam> MaskModel::parameters() {
  std::vector<nn::NamedParam> out;
  encoder_.append_params(out);
  sr_.append_params(out);
  decoder_[0].append_params("dec1", out);
  decoder_[1].append_params("dec2", out);
  head_.append_params(out);
  return out;
}

void MaskModel::zero_grad() {
  for (auto& p : parameters()) p.param->zero_grad();
}

Mask target_for_trace(const Mask& native, const MaskModel::Trace& trace) {
  if (native.height == trace.valid_h && native.width == trace.valid_w) return native;
  return resize_nearest(native, trace.valid_h, trace.valid_w);
}

}  // namespace maskforge
