// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/tensor.hpp"

namespace maskforge {

std::string Tensor::shape_string() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

bool Mask::is_binary() const {
  for (std::uint8_t v : data)
    if (v != 0 && v != 255) return false;
  return true;
}

Tensor to_unit_tensor(const Image8& img) {
  Tensor t(img.height, img.width, img.channels);
  for (std::size_t i = 0; i < img.data.size(); ++i) t.data[i] = img.data[i] / 255.0;
  return t;
}

}  // namespace maskforge
