// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "maskforge/kernels.hpp"

namespace maskforge {

Branch parse_branch(const std::string& s) {
  if (s == "original") return Branch::original;
  if (s == "tampered") return Branch::tampered;
  throw std::invalid_argument("unknown branch '" + s + "'");
}

const char* mmd_kernel_name(MmdKernel k) { return k == MmdKernel::rbf ? "rbf" : "linear"; }

MmdKernel parse_mmd_kernel(const std::string& s) {
  if (s == "linear") return MmdKernel::linear;
  if (s == "rbf") return MmdKernel::rbf;
  throw std::invalid_argument("unknown mmd kernel '" + s + "'");
}

namespace {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

void check_finite(const Tensor& t, const char* stage) {
  for (double v : t.data)
    if (!std::isfinite(v)) throw std::runtime_error(std::string(stage) + ": non-finite activation");
}

}  // namespace

Tensor reflect_pad(const Tensor& image, int multiple, Padding* padding) {
  const int h = (image.height + multiple - 1) / multiple * multiple;
  const int w = (image.width + multiple - 1) / multiple * multiple;
  if (padding) *padding = {h - image.height, w - image.width};
  if (h == image.height && w == image.width) return image;
  Tensor out(h, w, image.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      std::copy_n(image.at(reflect_index(y, image.height), reflect_index(x, image.width)), image.channels,
                  out.at(y, x));
  return out;
}

Encoder::Encoder(int channels, bool tie_encoders)
    : channels_(channels), tied_(tie_encoders),
      backbone_{nn::Conv2d(3, channels, 3, 2, 1), nn::Conv2d(channels, channels, 3, 2, 1),
                nn::Conv2d(channels, channels, 3, 1, 1), nn::Conv2d(channels, channels, 3, 1, 1)},
      enc1_(channels, channels, 1, 1, 0) {
  if (channels <= 0) throw std::invalid_argument("channel count must be positive");
  if (!tied_) enc2_ = nn::Conv2d(channels, channels, 1, 1, 0);
}

void Encoder::init(std::mt19937_64& rng) {
  for (auto& c : backbone_) c.init(rng);
  enc1_.init(rng, std::sqrt(0.5));
  if (!tied_) enc2_.init(rng, std::sqrt(0.5));
}

Tensor Encoder::backbone_forward(const Tensor& image, BackboneTrace* trace) const {
  if (image.channels != 3) throw std::invalid_argument("extract_features expects a 3-channel image");
  if (image.height % kStride != 0 || image.width % kStride != 0)
    throw std::invalid_argument("image dims " + image.shape_string() + " not divisible by stride 4");
  Tensor x = image;
  if (trace) trace->input = image;
  for (int b = 0; b < kBlocks; ++b) {
    x = backbone_[b].forward(x);
    nn::relu_inplace(x);
    if (trace) trace->acts[b] = x;
  }
  return x;
}

void Encoder::backbone_backward(const BackboneTrace& trace, Tensor grad, bool need_input_grad) {
  for (int b = kBlocks - 1; b >= 0; --b) {
    nn::relu_backward(trace.acts[b], grad);
    const Tensor& in = b == 0 ? trace.input : trace.acts[b - 1];
    grad = backbone_[b].backward(in, grad, b > 0 || need_input_grad);
  }
}

FeatureEmbedding Encoder::extract_features(const Tensor& image) const {
  FeatureEmbedding f{backbone_forward(image, nullptr), EmbeddingSource::original};
  check_finite(f.data, "extract_features");
  return f;
}

Tensor Encoder::encode_forward(const Tensor& features, Branch branch) const {
  const nn::Conv2d& head = (branch == Branch::original || tied_) ? enc1_ : enc2_;
  return head.forward(features);
}

Tensor Encoder::encode_backward(const Tensor& features, const Tensor& grad_out, Branch branch) {
  return head(branch).backward(features, grad_out);
}

FeatureEmbedding Encoder::encode(const FeatureEmbedding& features, Branch branch) const {
  if (branch != Branch::original && branch != Branch::tampered) throw std::invalid_argument("unknown branch");
  FeatureEmbedding z{encode_forward(features.data, branch),
                     branch == Branch::original ? EmbeddingSource::original : EmbeddingSource::tampered};
  check_finite(z.data, "encode");
  return z;
}

void Encoder::append_params(std::vector<nn::NamedParam>& out) {
  for (int b = 0; b < kBlocks; ++b) backbone_[b].append_params("backbone.conv" + std::to_string(b), out);
  enc1_.append_params("enc1", out);
  if (!tied_) enc2_.append_params("enc2", out);
}

// ---------------------------------------------------------------------------

namespace {

// Median pairwise squared distance over the pooled points, plus the pair that
// realises it (-1 when the fallback of 1 is used).
struct Bandwidth {
  double h = 1.0;
  int i = -1;
  int j = -1;
};

Bandwidth rbf_bandwidth(const Tensor& z1, const Tensor& z2) {
  const std::size_t n = z1.pixels(), c = z1.channels;
  std::vector<const double*> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(z1.pixel(i));
  for (std::size_t i = 0; i < n; ++i) pts.push_back(z2.pixel(i));
  struct Pair {
    double d2;
    int i, j;
  };
  std::vector<Pair> d2;
  d2.reserve(pts.size() * (pts.size() - 1) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        const double d = pts[i][k] - pts[j][k];
        s += d * d;
      }
      d2.push_back({s, static_cast<int>(i), static_cast<int>(j)});
    }
  if (d2.empty()) return {};
  auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end(), [](const Pair& a, const Pair& b) { return a.d2 < b.d2; });
  if (!(mid->d2 > 0.0)) return {};
  return {mid->d2, mid->i, mid->j};
}

}  // namespace

double mmd_with_grad(const Tensor& z1, const Tensor& z2, MmdKernel kernel, Tensor* grad1, Tensor* grad2) {
  if (!z1.same_shape(z2)) throw std::invalid_argument("mmd: shape mismatch " + z1.shape_string() + " vs " +
                                                      z2.shape_string());
  const std::size_t n = z1.pixels(), c = z1.channels;
  if (n == 0) throw std::invalid_argument("mmd: empty embedding");
  if (grad1) *grad1 = Tensor(z1.height, z1.width, z1.channels);
  if (grad2) *grad2 = Tensor(z2.height, z2.width, z2.channels);

  if (kernel == MmdKernel::linear) {
    std::vector<double> diff(c, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      const double* a = z1.pixel(p);
      const double* b = z2.pixel(p);
      for (std::size_t k = 0; k < c; ++k) diff[k] += a[k] - b[k];
    }
    for (double& d : diff) d /= static_cast<double>(n);
    double value = 0.0;
    for (double d : diff) value += d * d;
    const double scale = 2.0 / static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t k = 0; k < c; ++k) {
        if (grad1) grad1->pixel(p)[k] = scale * diff[k];
        if (grad2) grad2->pixel(p)[k] = -scale * diff[k];
      }
    return value;
  }

  const Bandwidth bw = rbf_bandwidth(z1, z2);
  const double h = bw.h;
  const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  double dv_dh = 0.0;  // through k = exp(-s/h): dk/dh = k s / h^2
  std::vector<double> diff(c);
  // each term: k = exp(-|a-b|^2/h), dk/da = -2 (a-b) k / h
  auto accumulate = [&](const Tensor& a, const Tensor& b, double& sum, Tensor* ga, Tensor* gb, double weight) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double* pa = a.pixel(i);
        const double* pb = b.pixel(j);
        double s = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
          diff[k] = pa[k] - pb[k];
          s += diff[k] * diff[k];
        }
        const double kv = std::exp(-s / h);
        sum += kv;
        dv_dh += weight * inv_n2 * kv * s / (h * h);
        const double coeff = weight * inv_n2 * (-2.0 * kv / h);
        if (ga) kernels::axpy(coeff, diff.data(), ga->pixel(i), c);
        if (gb) kernels::axpy(-coeff, diff.data(), gb->pixel(j), c);
      }
  };
  accumulate(z1, z1, kxx, grad1, grad1, 1.0);
  accumulate(z2, z2, kyy, grad2, grad2, 1.0);
  accumulate(z1, z2, kxy, grad1, grad2, -2.0);
  if (bw.i >= 0 && (grad1 || grad2)) {
    // the bandwidth moves with the median pair: dh/dp_i = 2 (p_i - p_j)
    auto point = [&](int idx) -> std::pair<const double*, double*> {
      const bool first = static_cast<std::size_t>(idx) < n;
      const std::size_t p = first ? idx : idx - n;
      Tensor* g = first ? grad1 : grad2;
      return {(first ? z1 : z2).pixel(p), g ? g->pixel(p) : nullptr};
    };
    const auto [pi, gi] = point(bw.i);
    const auto [pj, gj] = point(bw.j);
    for (std::size_t k = 0; k < c; ++k) {
      const double d = 2.0 * dv_dh * (pi[k] - pj[k]);
      if (gi) gi[k] += d;
      if (gj) gj[k] -= d;
    }
  }
  const double value = (kxx + kyy - 2.0 * kxy) * inv_n2;
  return std::max(0.0, value);
}

double mmd(const FeatureEmbedding& z1, const FeatureEmbedding& z2, MmdKernel kernel) {
  return mmd_with_grad(z1.data, z2.data, kernel, nullptr, nullptr);
}

FeatureEmbedding concat_embeddings(const FeatureEmbedding& z1, const FeatureEmbedding& z2) {
  if (!z1.data.same_shape(z2.data))
    throw std::invalid_argument("concat: shape mismatch " + z1.data.shape_string() + " vs " +
                                z2.data.shape_string());
  const int c = z1.data.channels;
  FeatureEmbedding out{Tensor(z1.data.height, z1.data.width, 2 * c), EmbeddingSource::joint};
  for (std::size_t p = 0; p < z1.data.pixels(); ++p) {
    std::copy_n(z1.data.pixel(p), c, out.data.pixel(p));
    std::copy_n(z2.data.pixel(p), c, out.data.pixel(p) + c);
  }
  return out;
}

}  // namespace maskforge
