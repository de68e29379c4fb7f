// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <random>
#include <vector>

#include "maskforge/encoder.hpp"
#include "maskforge/nn.hpp"
#include "maskforge/tensor.hpp"

namespace maskforge {

/// Upsampling scale and the high-resolution grid it induces on a base size.
struct ScaleSpec {
  double rh = 1.0;
  double rw = 1.0;
  int base_h = 0;
  int base_w = 0;
  int hr_h = 0;  // floor(rh * base_h)
  int hr_w = 0;  // floor(rw * base_w)
  double cell_h = 0.0;  // 2 / hr_h
  double cell_w = 0.0;  // 2 / hr_w
};

/// Requires 1 <= r <= 4 on both axes.
ScaleSpec make_scale(int base_h, int base_w, double rh, double rw);

/// Pixel-centre coordinates of an axis with n cells: -1 + (2i+1)/n.
std::vector<double> axis_coords(int n);

struct Coord {
  double y = 0.0;
  double x = 0.0;
};

/// HR query coordinates in [-1,1]^2, row-major.
std::vector<Coord> make_hr_coords(const ScaleSpec& scale);

struct LocalGrid {
  int gh = 3;
  int gw = 3;
  int size() const { return gh * gw; }
  /// Throws unless both sides are odd and positive.
  void validate() const;
};

/// For every query: the LR pixel nearest to it and a gh x gw window of LR
/// positions centred there (indices clamped at the border), plus the offsets
/// x_q - x_neighbour in normalised coordinates.
struct LocalWindow {
  int lr_h = 0;
  int lr_w = 0;
  int queries = 0;
  int neighbors = 0;
  std::vector<int> center;     // [queries], flat LR index
  std::vector<int> index;      // [queries * neighbors], flat LR index
  std::vector<double> offset;  // [queries * neighbors * 2], (dy, dx)
};

LocalWindow local_sample(int lr_h, int lr_w, const std::vector<Coord>& queries, const LocalGrid& grid);
/// Neighbour values: queries x neighbors x channels.
Tensor gather_neighbors(const Tensor& field, const LocalWindow& window);

struct LatentBundle {
  Tensor q, k, v, f;
};

struct AttentionOutput {
  Tensor z;                     // hr_h x hr_w x D
  std::vector<double> weights;  // [queries * neighbors], softmax per query
};

/// Cross-scale local attention: per query, softmax over the window of
/// <q(centre), k(n)> / sqrt(D) + pos . dx(n), then the weighted sum of v(n).
AttentionOutput cslab(const LocalWindow& window, const Tensor& q, const Tensor& k, const Tensor& v,
                      const std::array<double, 2>& pos_weight, int hr_h, int hr_w);

/// Encoding of one neighbour before aggregation. `f` holds `pairs`
/// interleaved (f_h, f_w) frequencies; out[c] = cos(pi phi_c),
/// out[pairs + c] = sin(pi phi_c) with phi_c = f_h dy + f_w dx.
void lfeb_encoding(const double* f, int pairs, double dy, double dx, double* out);

/// Local frequency encoding aggregated with the attention weights from cslab.
Tensor lfeb(const LocalWindow& window, const Tensor& f, const std::vector<double>& weights, int hr_h, int hr_w);

/// Elementwise product followed by a per-pixel linear map.
Tensor fuse(const Tensor& z, const Tensor& freq, const nn::Conv2d& linear);

/// Arbitrary-scale upsampler for the joint embedding.
class SuperResolver {
 public:
  SuperResolver() = default;
  SuperResolver(int joint_channels, LocalGrid grid);

  int channels() const { return channels_; }
  const LocalGrid& grid() const { return grid_; }
  void init(std::mt19937_64& rng);

  LatentBundle project_qkvf(const FeatureEmbedding& z3) const;

  struct Trace {
    Tensor z3;
    LatentBundle bundle;
    LocalWindow window;
    AttentionOutput attention;
    Tensor freq;    // lfeb output
    Tensor fused_in;  // attention.z * freq
  };
  /// HR joint embedding of size scale.hr_h x scale.hr_w x D.
  Tensor forward(const Tensor& z3, const ScaleSpec& scale, Trace* trace) const;
  /// Accumulates parameter gradients; returns d/dZ3.
  Tensor backward(const Trace& trace, const Tensor& grad_out);

  void append_params(std::vector<nn::NamedParam>& out);

  nn::Conv2d& projection(int i) { return proj_[i]; }  // 0 q, 1 k, 2 v, 3 f
  nn::Conv2d& fuse_linear() { return fuse_; }
  nn::Param& pos_param() { return pos_; }

 private:
  std::array<double, 2> pos_array() const { return {pos_.value[0], pos_.value[1]}; }

  int channels_ = 0;
  LocalGrid grid_;
  std::array<nn::Conv2d, 4> proj_;
  nn::Param pos_{std::vector<int>{2}};
  nn::Conv2d fuse_;
};

}  // namespace maskforge
