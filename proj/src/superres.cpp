// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/superres.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "maskforge/kernels.hpp"

namespace maskforge {

ScaleSpec make_scale(int base_h, int base_w, double rh, double rw) {
  if (base_h <= 0 || base_w <= 0) throw std::invalid_argument("scale: base size must be positive");
  if (!(rh >= 1.0 && rh <= 4.0 && rw >= 1.0 && rw <= 4.0))
    throw std::invalid_argument("scale factors must lie in [1, 4]");
  ScaleSpec s;
  s.rh = rh;
  s.rw = rw;
  s.base_h = base_h;
  s.base_w = base_w;
  // the epsilon keeps products such as 1.1 * 10 from flooring one cell short
  s.hr_h = static_cast<int>(std::floor(rh * base_h + 1e-9));
  s.hr_w = static_cast<int>(std::floor(rw * base_w + 1e-9));
  s.cell_h = 2.0 / s.hr_h;
  s.cell_w = 2.0 / s.hr_w;
  return s;
}

std::vector<double> axis_coords(int n) {
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[i] = -1.0 + (2.0 * i + 1.0) / n;
  return c;
}

std::vector<Coord> make_hr_coords(const ScaleSpec& scale) {
  const std::vector<double> ys = axis_coords(scale.hr_h);
  const std::vector<double> xs = axis_coords(scale.hr_w);
  std::vector<Coord> out;
  out.reserve(ys.size() * xs.size());
  for (double y : ys)
    for (double x : xs) out.push_back({y, x});
  return out;
}

void LocalGrid::validate() const {
  if (gh <= 0 || gw <= 0 || gh % 2 == 0 || gw % 2 == 0)
    throw std::invalid_argument("local grid sides must be odd and positive, got " + std::to_string(gh) + "x" +
                                std::to_string(gw));
}

namespace {

int nearest_index(double coord, int n) {
  const int i = static_cast<int>(std::floor((coord + 1.0) * 0.5 * n));
  return std::clamp(i, 0, n - 1);
}

}  // namespace

LocalWindow local_sample(int lr_h, int lr_w, const std::vector<Coord>& queries, const LocalGrid& grid) {
  grid.validate();
  if (lr_h <= 0 || lr_w <= 0) throw std::invalid_argument("local_sample: empty field");
  LocalWindow w;
  w.lr_h = lr_h;
  w.lr_w = lr_w;
  w.queries = static_cast<int>(queries.size());
  w.neighbors = grid.size();
  w.center.resize(queries.size());
  w.index.resize(queries.size() * grid.size());
  w.offset.resize(queries.size() * grid.size() * 2);
  const std::vector<double> ys = axis_coords(lr_h);
  const std::vector<double> xs = axis_coords(lr_w);
  const int hy = grid.gh / 2, hx = grid.gw / 2;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const int cy = nearest_index(queries[q].y, lr_h);
    const int cx = nearest_index(queries[q].x, lr_w);
    w.center[q] = cy * lr_w + cx;
    int n = 0;
    for (int a = -hy; a <= hy; ++a)
      for (int b = -hx; b <= hx; ++b, ++n) {
        const int iy = std::clamp(cy + a, 0, lr_h - 1);
        const int ix = std::clamp(cx + b, 0, lr_w - 1);
        const std::size_t slot = q * grid.size() + n;
        w.index[slot] = iy * lr_w + ix;
        w.offset[2 * slot] = queries[q].y - ys[iy];
        w.offset[2 * slot + 1] = queries[q].x - xs[ix];
      }
  }
  return w;
}

Tensor gather_neighbors(const Tensor& field, const LocalWindow& window) {
  if (field.height != window.lr_h || field.width != window.lr_w)
    throw std::invalid_argument("gather_neighbors: field size does not match window");
  Tensor out(window.queries, window.neighbors, field.channels);
  for (std::size_t s = 0; s < window.index.size(); ++s)
    std::copy_n(field.pixel(window.index[s]), field.channels, out.pixel(s));
  return out;
}

AttentionOutput cslab(const LocalWindow& window, const Tensor& q, const Tensor& k, const Tensor& v,
                      const std::array<double, 2>& pos_weight, int hr_h, int hr_w) {
  if (!q.same_shape(k) || !q.same_shape(v)) throw std::invalid_argument("cslab: q/k/v shape mismatch");
  if (q.height != window.lr_h || q.width != window.lr_w)
    throw std::invalid_argument("cslab: field size does not match window");
  if (static_cast<std::size_t>(hr_h) * hr_w != static_cast<std::size_t>(window.queries))
    throw std::invalid_argument("cslab: query count does not match output size");
  const std::size_t d = q.channels;
  const int g = window.neighbors;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const auto& kt = kernels::active();
  AttentionOutput out{Tensor(hr_h, hr_w, static_cast<int>(d)),
                      std::vector<double>(static_cast<std::size_t>(window.queries) * g)};
  for (int p = 0; p < window.queries; ++p) {
    const double* qp = q.pixel(window.center[p]);
    double* w = out.weights.data() + static_cast<std::size_t>(p) * g;
    double mx = -INFINITY;
    for (int n = 0; n < g; ++n) {
      const std::size_t slot = static_cast<std::size_t>(p) * g + n;
      const double* off = window.offset.data() + 2 * slot;
      w[n] = kt.dot(qp, k.pixel(window.index[slot]), d) * inv_sqrt_d + pos_weight[0] * off[0] +
             pos_weight[1] * off[1];
      mx = std::max(mx, w[n]);
    }
    double sum = 0.0;
    for (int n = 0; n < g; ++n) {
      w[n] = std::exp(w[n] - mx);
      sum += w[n];
    }
    double* z = out.z.pixel(p);
    for (int n = 0; n < g; ++n) {
      w[n] /= sum;
      kt.axpy(w[n], v.pixel(window.index[static_cast<std::size_t>(p) * g + n]), z, d);
    }
  }
  return out;
}

void lfeb_encoding(const double* f, int pairs, double dy, double dx, double* out) {
  for (int c = 0; c < pairs; ++c) {
    const double phase = std::numbers::pi * (f[2 * c] * dy + f[2 * c + 1] * dx);
    out[c] = std::cos(phase);
    out[pairs + c] = std::sin(phase);
  }
}

Tensor lfeb(const LocalWindow& window, const Tensor& f, const std::vector<double>& weights, int hr_h, int hr_w) {
  if (f.height != window.lr_h || f.width != window.lr_w)
    throw std::invalid_argument("lfeb: field size does not match window");
  if (f.channels % 2 != 0) throw std::invalid_argument("lfeb: frequency channels must be even");
  if (weights.size() != static_cast<std::size_t>(window.queries) * window.neighbors ||
      static_cast<std::size_t>(hr_h) * hr_w != static_cast<std::size_t>(window.queries))
    throw std::invalid_argument("lfeb: weights/output size mismatch");
  const int pairs = f.channels / 2;
  const int g = window.neighbors;
  Tensor out(hr_h, hr_w, f.channels);
  std::vector<double> enc(f.channels);
  for (int p = 0; p < window.queries; ++p) {
    double* o = out.pixel(p);
    for (int n = 0; n < g; ++n) {
      const std::size_t slot = static_cast<std::size_t>(p) * g + n;
      lfeb_encoding(f.pixel(window.index[slot]), pairs, window.offset[2 * slot], window.offset[2 * slot + 1],
                    enc.data());
      kernels::axpy(weights[slot], enc.data(), o, enc.size());
    }
  }
  return out;
}

Tensor fuse(const Tensor& z, const Tensor& freq, const nn::Conv2d& linear) {
  if (!z.same_shape(freq)) throw std::invalid_argument("fuse: shape mismatch " + z.shape_string() + " vs " +
                                                       freq.shape_string());
  Tensor prod = z;
  for (std::size_t i = 0; i < prod.data.size(); ++i) prod.data[i] *= freq.data[i];
  return linear.forward(prod);
}

// ---------------------------------------------------------------------------

SuperResolver::SuperResolver(int joint_channels, LocalGrid grid)
    : channels_(joint_channels), grid_(grid),
      proj_{nn::Conv2d(joint_channels, joint_channels, 1, 1, 0), nn::Conv2d(joint_channels, joint_channels, 1, 1, 0),
            nn::Conv2d(joint_channels, joint_channels, 1, 1, 0), nn::Conv2d(joint_channels, joint_channels, 1, 1, 0)},
      fuse_(joint_channels, joint_channels, 1, 1, 0) {
  if (joint_channels <= 0 || joint_channels % 2 != 0)
    throw std::invalid_argument("joint channel count must be positive and even");
  grid_.validate();
}

void SuperResolver::init(std::mt19937_64& rng) {
  for (auto& p : proj_) p.init(rng, std::sqrt(0.5));
  std::fill(pos_.value.begin(), pos_.value.end(), 0.0);
  fuse_.init(rng, std::sqrt(0.5));
}

LatentBundle SuperResolver::project_qkvf(const FeatureEmbedding& z3) const {
  if (z3.data.channels != channels_)
    throw std::invalid_argument("project_qkvf expects " + std::to_string(channels_) + " channels, got " +
                                std::to_string(z3.data.channels));
  return {proj_[0].forward(z3.data), proj_[1].forward(z3.data), proj_[2].forward(z3.data),
          proj_[3].forward(z3.data)};
}

Tensor SuperResolver::forward(const Tensor& z3, const ScaleSpec& scale, Trace* trace) const {
  Trace local;
  Trace& t = trace ? *trace : local;
  t.z3 = z3;
  t.bundle = project_qkvf({z3, EmbeddingSource::joint});
  t.window = local_sample(z3.height, z3.width, make_hr_coords(scale), grid_);
  t.attention = cslab(t.window, t.bundle.q, t.bundle.k, t.bundle.v, pos_array(), scale.hr_h, scale.hr_w);
  t.freq = lfeb(t.window, t.bundle.f, t.attention.weights, scale.hr_h, scale.hr_w);
  t.fused_in = t.attention.z;
  for (std::size_t i = 0; i < t.fused_in.data.size(); ++i) t.fused_in.data[i] *= t.freq.data[i];
  return fuse_.forward(t.fused_in);
}

Tensor SuperResolver::backward(const Trace& t, const Tensor& grad_out) {
  const auto& kt = kernels::active();
  const Tensor du = fuse_.backward(t.fused_in, grad_out);
  const std::size_t d = channels_;
  const int pairs = channels_ / 2;
  const int g = t.window.neighbors;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const LatentBundle& b = t.bundle;

  Tensor dq(b.q.height, b.q.width, b.q.channels);
  Tensor dk(dq.height, dq.width, dq.channels);
  Tensor dv(dq.height, dq.width, dq.channels);
  Tensor df(dq.height, dq.width, dq.channels);
  std::vector<double> dz(d), dg(d), enc(d), dw(g), ds(g);

  for (int p = 0; p < t.window.queries; ++p) {
    const double* z = t.attention.z.pixel(p);
    const double* gq = t.freq.pixel(p);
    const double* dup = du.pixel(p);
    for (std::size_t c = 0; c < d; ++c) {
      dz[c] = dup[c] * gq[c];
      dg[c] = dup[c] * z[c];
    }
    const double* w = t.attention.weights.data() + static_cast<std::size_t>(p) * g;
    double wdw = 0.0;
    for (int n = 0; n < g; ++n) {
      const std::size_t slot = static_cast<std::size_t>(p) * g + n;
      const int idx = t.window.index[slot];
      const double oy = t.window.offset[2 * slot], ox = t.window.offset[2 * slot + 1];
      const double* fn = b.f.pixel(idx);
      lfeb_encoding(fn, pairs, oy, ox, enc.data());
      dw[n] = kt.dot(dz.data(), b.v.pixel(idx), d) + kt.dot(dg.data(), enc.data(), d);
      wdw += w[n] * dw[n];
      kt.axpy(w[n], dz.data(), dv.pixel(idx), d);
      double* dfn = df.pixel(idx);
      for (int c = 0; c < pairs; ++c) {
        // enc[c] = cos(phase), enc[pairs + c] = sin(phase)
        const double dphase =
            std::numbers::pi * w[n] * (-enc[pairs + c] * dg[c] + enc[c] * dg[pairs + c]);
        dfn[2 * c] += dphase * oy;
        dfn[2 * c + 1] += dphase * ox;
      }
    }
    const int center = t.window.center[p];
    const double* qp = b.q.pixel(center);
    double* dqp = dq.pixel(center);
    for (int n = 0; n < g; ++n) {
      const std::size_t slot = static_cast<std::size_t>(p) * g + n;
      ds[n] = w[n] * (dw[n] - wdw);
      if (ds[n] == 0.0) continue;
      const int idx = t.window.index[slot];
      kt.axpy(ds[n] * inv_sqrt_d, b.k.pixel(idx), dqp, d);
      kt.axpy(ds[n] * inv_sqrt_d, qp, dk.pixel(idx), d);
      pos_.grad[0] += ds[n] * t.window.offset[2 * slot];
      pos_.grad[1] += ds[n] * t.window.offset[2 * slot + 1];
    }
  }

  Tensor dz3 = proj_[0].backward(t.z3, dq);
  const Tensor* grads[3] = {&dk, &dv, &df};
  for (int i = 0; i < 3; ++i) {
    const Tensor gi = proj_[i + 1].backward(t.z3, *grads[i]);
    for (std::size_t j = 0; j < dz3.data.size(); ++j) dz3.data[j] += gi.data[j];
  }
  return dz3;
}

void SuperResolver::append_params(std::vector<nn::NamedParam>& out) {
  static const char* names[4] = {"proj.q", "proj.k", "proj.v", "proj.f"};
  for (int i = 0; i < 4; ++i) proj_[i].append_params(names[i], out);
  out.push_back({"cslab.pos_weight", &pos_});
  fuse_.append_params("fuse", out);
}

}  // namespace maskforge
