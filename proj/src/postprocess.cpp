// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/postprocess.hpp"

#include <stdexcept>

#include "maskforge/kernels.hpp"

namespace maskforge {

double white_fraction(const Mask& mask) {
  if (mask.pixels() == 0) throw std::invalid_argument("white_fraction: empty mask");
  if (!mask.is_binary()) throw std::invalid_argument("white_fraction: mask is not binary");
  const std::size_t white = kernels::active().count_nonzero(mask.data.data(), mask.pixels());
  return static_cast<double>(white) / static_cast<double>(mask.pixels());
}

const char* filter_reason_name(FilterReason r) {
  switch (r) {
    case FilterReason::none: return "none";
    case FilterReason::too_white: return "too_white";
    case FilterReason::too_empty: return "too_empty";
  }
  return "none";
}

FilterVerdict classify_fraction(double fraction) {
  FilterVerdict v;
  v.fraction = fraction;
  if (fraction > kMaxWhiteFraction) v = {false, FilterReason::too_white, fraction};
  else if (fraction < kMinWhiteFraction) v = {false, FilterReason::too_empty, fraction};
  return v;
}

FilterVerdict filter_valid(const Mask& mask) {
  const double fraction = white_fraction(mask);
  const std::uint64_t white = kernels::active().count_nonzero(mask.data.data(), mask.pixels());
  const std::uint64_t total = mask.pixels();
  // white/total > 70/100 and white/total < 1/100, cross-multiplied
  if (white * 100 > total * 70) return {false, FilterReason::too_white, fraction};
  if (white * 100 < total * 1) return {false, FilterReason::too_empty, fraction};
  return {true, FilterReason::none, fraction};
}

Mask baseline_subtract(const ImagePair& pair, int threshold) {
  if (!pair.original.same_size(pair.tampered))
    throw std::invalid_argument("baseline_subtract: images differ in size");
  if (pair.original.channels != 3 || pair.tampered.channels != 3)
    throw std::invalid_argument("baseline_subtract expects RGB images");
  Mask m(pair.original.height, pair.original.width, MaskSource::baseline);
  kernels::active().absdiff_threshold_rgb(pair.original.data.data(), pair.tampered.data.data(), m.data.data(),
                                          m.pixels(), threshold);
  return m;
}

}  // namespace maskforge
