// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace maskforge {

/// Dense real grid in height x width x channels layout, channels contiguous
/// per pixel.
struct Tensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {}

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return data.size(); }

  double* at(int y, int x) { return data.data() + (static_cast<std::size_t>(y) * width + x) * channels; }
  const double* at(int y, int x) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  double* pixel(std::size_t p) { return data.data() + p * channels; }
  const double* pixel(std::size_t p) const { return data.data() + p * channels; }

  bool same_shape(const Tensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  std::string shape_string() const;
};

/// 8-bit interleaved image. Colour images are stored RGB.
struct Image8 {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Image8() = default;
  Image8(int h, int w, int c, std::uint8_t fill = 0)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {}

  std::uint8_t* at(int y, int x) { return data.data() + (static_cast<std::size_t>(y) * width + x) * channels; }
  const std::uint8_t* at(int y, int x) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  bool same_size(const Image8& o) const { return height == o.height && width == o.width; }
};

enum class MaskSource { model, baseline, ground_truth };

/// Binary mask, one byte per pixel, values {0, 255}.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;
  MaskSource source = MaskSource::ground_truth;

  Mask() = default;
  Mask(int h, int w, MaskSource src = MaskSource::ground_truth, std::uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill), source(src) {}

  std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t pixels() const { return data.size(); }
  bool is_binary() const;
};

/// Normalises an 8-bit image into [0,1] doubles.
Tensor to_unit_tensor(const Image8& img);

}  // namespace maskforge
