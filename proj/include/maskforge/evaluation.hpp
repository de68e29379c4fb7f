// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "maskforge/ingestion.hpp"
#include "maskforge/tensor.hpp"

namespace maskforge {

/// Pixel counts with white (tampered) as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(const Mask& pred, const Mask& gt);

struct ImageMetrics;

struct MetricsReport {
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  double accuracy = 0.0;
  // TP = FP = FN = 0: F1 and IoU reported as 1
  bool degenerate_negative = false;
  std::vector<ImageMetrics> per_image;
};

struct ImageMetrics {
  std::string pair_id;
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  double accuracy = 0.0;
  bool degenerate_negative = false;
};

/// Zero-denominator ratios are 0, except the all-negative perfect case.
/// Throws on an empty count set.
MetricsReport metrics(const ConfusionCounts& counts);

/// Micro-averaged report over records, reading `<pred_dir>/<pair_id><suffix>`.
/// Throws listing every pair without a prediction.
MetricsReport evaluate_dataset(const std::vector<ManifestRecord>& records, const std::filesystem::path& pred_dir,
                               const std::string& suffix = "_mask.png");

inline constexpr int kReportVersion = 1;
nlohmann::json report_to_json(const MetricsReport& report);
void write_report(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace maskforge
