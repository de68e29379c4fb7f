// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "maskforge/evaluation.hpp"
#include "maskforge/ingestion.hpp"
#include "maskforge/maskgen.hpp"
#include "maskforge/model.hpp"

namespace maskforge {

enum class Optimizer { sgd, adam };
const char* optimizer_name(Optimizer o);
Optimizer parse_optimizer(const std::string& s);

struct TrainConfig {
  double learning_rate = 0.01;
  int max_epochs = 100;
  int lr_decay_iters = 100;  // epochs over which lr falls linearly to 0
  int batch_size = 1;
  double lambda_mmd = 0.01;
  std::uint64_t seed = 0;
  double r_min = 1.0;  // per-batch scale drawn uniformly from [r_min, r_max]
  double r_max = 2.0;
  Optimizer optimizer = Optimizer::sgd;
  double momentum = 0.9;  // sgd momentum, adam beta1
  int max_steps = 0;  // 0: no cap
  double val_threshold = 0.5;
  double grad_clip = 0.0;  // global L2 norm cap per step; 0: off

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Mean over pixels of -sum_c M_c log P_c, log input clamped at 1e-12.
double cross_entropy(const ProbMap& prob, const Mask& target);

/// cross_entropy + lambda * mmd(Z1, Z2).
double total_loss(const ProbMap& prob, const Mask& target, const FeatureEmbedding& z1, const FeatureEmbedding& z2,
                  double lambda_mmd, MmdKernel kernel = MmdKernel::linear);

struct Sample {
  ImagePair pair;
  Mask mask;
};

std::vector<Sample> load_samples(const std::vector<ManifestRecord>& records);

/// Named parameter snapshot plus the configuration that produced it.
struct Checkpoint {
  struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;
  };
  ModelConfig model;
  TrainConfig train;
  int epoch = -1;
  double best_val_f1 = 0.0;
  std::vector<Tensor> tensors;
};

Checkpoint capture(MaskModel& model, const TrainConfig& train, int epoch, double best_val_f1);
/// Rebuilds a model; throws when names or shapes disagree with the config.
MaskModel restore(const Checkpoint& ckpt);

inline constexpr int kCheckpointVersion = 1;
/// Binary archive: magic, JSON header length, JSON header, raw float64 data.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct EpochLog {
  int epoch = 0;
  int steps = 0;
  double ce = 0.0;   // mean over the epoch's steps
  double mmd = 0.0;  // mean over the epoch's steps
  double val_f1 = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochLog> history;
  int steps = 0;
};

/// Raised when a loss turns non-finite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// SGD with momentum (or Adam) and linear lr decay. Validation F1 is computed after
/// every epoch; the returned checkpoint is the best-F1 epoch (earliest on
/// ties). Deterministic for a fixed seed.
TrainResult train(const TrainConfig& config, const ModelConfig& model_config, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const EpochCallback& on_epoch = {});

/// Manifest front end: trains on split=train, validates on split=val.
TrainResult train(const TrainConfig& config, const ModelConfig& model_config, const DatasetManifest& manifest,
                  const EpochCallback& on_epoch = {});

/// Pooled metrics of predict_mask(r = 1, tau) over the samples.
MetricsReport validate(const MaskModel& model, const std::vector<Sample>& samples, double tau = 0.5);
/// Same over manifest records; every record needs a ground-truth mask.
MetricsReport validate(const Checkpoint& ckpt, const std::vector<ManifestRecord>& records, double tau = 0.5);

}  // namespace maskforge
