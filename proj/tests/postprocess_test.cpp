// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "maskforge/ingestion.hpp"
#include "maskforge/postprocess.hpp"
#include "support.hpp"

using namespace maskforge;

namespace {

Mask mask_with_white(int h, int w, int white) {
  Mask m(h, w);
  for (int i = 0; i < white; ++i) m.data[i] = 255;
  return m;
}

Mask brute_baseline(const ImagePair& p, int threshold) {
  Mask m(p.original.height, p.original.width, MaskSource::baseline);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      int best = 0;
      for (int c = 0; c < 3; ++c) {
        const int d = int(p.original.at(y, x)[c]) - int(p.tampered.at(y, x)[c]);
        best = std::max(best, d < 0 ? -d : d);
      }
      m.at(y, x) = best >= threshold ? 255 : 0;
    }
  return m;
}

}  // namespace

TEST_SUITE("postprocess") {

TEST_CASE("white fraction") {
  CHECK(white_fraction(Mask(8, 8)) == 0.0);
  CHECK(white_fraction(Mask(8, 8, MaskSource::model, 255)) == 1.0);
  CHECK(white_fraction(mask_with_white(64, 64, 400)) == 0.09765625);
  Mask bad(2, 2);
  bad.data[1] = 3;
  CHECK_THROWS_AS(white_fraction(bad), std::invalid_argument);
  CHECK_THROWS_AS(filter_valid(bad), std::invalid_argument);
}

TEST_CASE("filter boundaries") {
  const double fractions[] = {0.005, 0.0099, 0.01, 0.30, 0.70, 0.71, 1.0};
  const bool valid[] = {false, false, true, true, true, false, false};
  for (int i = 0; i < 7; ++i) CHECK(classify_fraction(fractions[i]).valid == valid[i]);
  CHECK(classify_fraction(0.71).reason == FilterReason::too_white);
  CHECK(classify_fraction(0.005).reason == FilterReason::too_empty);
  CHECK(classify_fraction(0.70).reason == FilterReason::none);
  CHECK(std::string(filter_reason_name(FilterReason::too_white)) == "too_white");

  // exact boundaries on real masks: 70 of 100 and 1 of 100 are valid
  CHECK(filter_valid(mask_with_white(10, 10, 70)).valid);
  CHECK_FALSE(filter_valid(mask_with_white(10, 10, 71)).valid);
  CHECK(filter_valid(mask_with_white(10, 10, 1)).valid);
  CHECK_FALSE(filter_valid(mask_with_white(20, 10, 1)).valid);
  CHECK(filter_valid(mask_with_white(10, 10, 70)).fraction == 0.70);
}

TEST_CASE("filter depends only on the white fraction") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 300; ++t) {
    const int h = 1 + static_cast<int>(rng() % 40), w = 1 + static_cast<int>(rng() % 40);
    const Mask m = testing::random_mask(rng, h, w, std::uniform_real_distribution<double>(0, 1)(rng));
    const FilterVerdict a = filter_valid(m);
    const FilterVerdict b = classify_fraction(white_fraction(m));
    CHECK(a.valid == b.valid);
    CHECK(a.reason == b.reason);
    Mask shuffled = m;
    std::shuffle(shuffled.data.begin(), shuffled.data.end(), rng);
    CHECK(filter_valid(shuffled).valid == a.valid);
  }
}

TEST_CASE("baseline subtraction") {
  Image8 a(4, 4, 3, 100), b(4, 4, 3, 100);
  ImagePair same{"s", a, a};
  const Mask zero = baseline_subtract(same);
  for (auto v : zero.data) CHECK(v == 0);
  CHECK(zero.source == MaskSource::baseline);
  CHECK(filter_valid(zero).reason == FilterReason::too_empty);

  b.at(1, 1)[2] = 129;  // differs by 29
  b.at(2, 3)[0] = 70;   // differs by 30
  const Mask m = baseline_subtract({"p", a, b});
  CHECK(m.at(1, 1) == 0);
  CHECK(m.at(2, 3) == 255);
  CHECK(baseline_subtract({"p", a, b}, 29).at(1, 1) == 255);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const ImagePair p{"r", testing::random_image(rng, 64, 64), testing::random_image(rng, 64, 64)};
    const Mask got = baseline_subtract(p, kBaselineThreshold);
    CHECK(got.data == brute_baseline(p, kBaselineThreshold).data);
    CHECK(baseline_subtract({"q", p.tampered, p.original}).data == got.data);
  }
  CHECK_THROWS_AS(baseline_subtract({"x", Image8(4, 4, 3), Image8(4, 5, 3)}), std::invalid_argument);
}

}
