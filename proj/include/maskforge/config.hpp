// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "maskforge/model.hpp"
#include "maskforge/training.hpp"

namespace maskforge {

/// Training and model settings read from a `key = value` file. '#' starts a
/// comment that runs to the end of the line. Keys mirror the TrainConfig and
/// ModelConfig fields:
///
///   learning_rate, max_epochs, lr_decay_iters, batch_size, lambda_mmd, seed,
///   r_min, r_max, optimizer, momentum, max_steps, val_threshold, grad_clip,
///   channels, decoder_hidden, grid_h, grid_w, tie_encoders, mmd_kernel,
///   residual_offset
struct RunConfig {
  TrainConfig train;
  ModelConfig model;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Throws std::invalid_argument for unknown keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace maskforge
