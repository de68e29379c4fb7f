// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "maskforge/ingestion.hpp"
#include "maskforge/tensor.hpp"

namespace maskforge {

/// Masks whiter than this fraction, or emptier than the minimum, are dropped.
/// Both bounds themselves are valid.
inline constexpr double kMaxWhiteFraction = 0.70;
inline constexpr double kMinWhiteFraction = 0.01;
/// Per-channel absolute difference that marks a pixel in the naive baseline.
inline constexpr int kBaselineThreshold = 30;

/// count(255) / pixels. Throws on non-binary masks.
double white_fraction(const Mask& mask);

enum class FilterReason { none, too_white, too_empty };
const char* filter_reason_name(FilterReason r);

struct FilterVerdict {
  bool valid = true;
  FilterReason reason = FilterReason::none;
  double fraction = 0.0;
};

/// Decision on a white fraction alone.
FilterVerdict classify_fraction(double fraction);
/// Same rule, evaluated on integer pixel counts so boundary masks are exact.
FilterVerdict filter_valid(const Mask& mask);

/// White where the largest per-channel |original - tampered| reaches
/// `threshold`.
Mask baseline_subtract(const ImagePair& pair, int threshold = kBaselineThreshold);

}  // namespace maskforge
