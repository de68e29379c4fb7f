// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "maskforge/tensor.hpp"

namespace maskforge::testing {

/// Fresh, empty scratch directory under $MASKFORGE_TMP (or the system temp).
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* env = std::getenv("MASKFORGE_TMP");
  std::filesystem::path root = env ? env : std::filesystem::temp_directory_path() / "maskforge_tests";
  std::filesystem::path dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Tensor random_tensor(std::mt19937_64& rng, int h, int w, int c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(h, w, c);
  for (double& v : t.data) v = u(rng);
  return t;
}

inline Mask random_mask(std::mt19937_64& rng, int h, int w, double p_white = 0.5) {
  std::bernoulli_distribution b(p_white);
  Mask m(h, w);
  for (auto& v : m.data) v = b(rng) ? 255 : 0;
  return m;
}

inline Image8 random_image(std::mt19937_64& rng, int h, int w, int c = 3) {
  Image8 img(h, w, c);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() & 0xFF);
  return img;
}

}  // namespace maskforge::testing
