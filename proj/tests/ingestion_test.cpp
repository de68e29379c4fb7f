// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <opencv2/imgcodecs.hpp>

#include "maskforge/ingestion.hpp"
#include "maskforge/postprocess.hpp"
#include "support.hpp"

using namespace maskforge;
namespace fs = std::filesystem;

namespace {

void write_pair(const fs::path& dir, const std::string& id, int h, int w, int h2, int w2, std::mt19937_64& rng,
                bool with_mask = true) {
  write_png(dir / (id + "_orig.png"), testing::random_image(rng, h, w));
  write_png(dir / (id + "_tamp.png"), testing::random_image(rng, h2, w2));
  if (with_mask) write_mask_png(dir / (id + "_mask.png"), testing::random_mask(rng, h, w));
}

// Direct 2-D convolution with reflect-101 borders; independent of the
// separable implementation.
std::vector<double> direct_blur(const Image8& img, double sigma, int channel) {
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k1(2 * r + 1);
  double s = 0;
  for (int i = -r; i <= r; ++i) s += k1[i + r] = std::exp(-(i * i) / (2 * sigma * sigma));
  for (double& v : k1) v /= s;
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
    return i;
  };
  std::vector<double> out(img.pixels());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          acc += k1[dy + r] * k1[dx + r] * img.at(reflect(y + dy, img.height), reflect(x + dx, img.width))[channel];
      out[static_cast<std::size_t>(y) * img.width + x] = acc;
    }
  return out;
}

}  // namespace

TEST_SUITE("ingestion") {

TEST_CASE("scan_pairs keeps equal-size pairs and reports the rest") {
  const fs::path dir = testing::scratch_dir("scan_basic");
  std::mt19937_64 rng(3);
  write_pair(dir, "a", 16, 20, 16, 20, rng);
  write_pair(dir, "b", 16, 20, 16, 20, rng);
  write_pair(dir, "c", 24, 24, 24, 24, rng, false);
  write_pair(dir, "d", 16, 16, 32, 32, rng);  // tampered twice the original size
  const ScanResult res = scan_pairs(dir);
  REQUIRE(res.manifest.records.size() == 3);
  REQUIRE(res.skipped.size() == 1);
  CHECK(res.skipped[0].pair_id == "d");
  CHECK(res.skipped[0].reason.find("size mismatch") != std::string::npos);
  for (const auto& r : res.manifest.records) {
    CHECK(r.pair_id != "d");
    CHECK(r.roles_assumed);
    if (r.pair_id == "c") {
      CHECK_FALSE(r.mask_path.has_value());
      CHECK(r.split == Split::test);
    }
  }
  CHECK_NOTHROW(res.manifest.validate());
}

TEST_CASE("scan_pairs errors") {
  const fs::path empty = testing::scratch_dir("scan_empty");
  CHECK_THROWS_WITH_AS(scan_pairs(empty), doctest::Contains("no valid pairs"), std::runtime_error);
  CHECK_THROWS_AS(scan_pairs(empty / "does_not_exist"), std::runtime_error);
  ScanOptions bad;
  bad.layout = "flat";
  CHECK_THROWS_AS(scan_pairs(empty, bad), std::invalid_argument);
  bad.layout = "suffix";
  bad.val_fraction = 0.8;
  bad.test_fraction = 0.8;
  CHECK_THROWS_AS(scan_pairs(empty, bad), std::invalid_argument);

  const fs::path only_bad = testing::scratch_dir("scan_only_bad");
  std::mt19937_64 rng(4);
  write_pair(only_bad, "x", 16, 16, 17, 16, rng);
  CHECK_THROWS_WITH_AS(scan_pairs(only_bad), doctest::Contains("size mismatch"), std::runtime_error);
}

TEST_CASE("scan_pairs never admits unequal dimensions (fuzz)") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    const fs::path dir = testing::scratch_dir("scan_fuzz_" + std::to_string(trial));
    const bool subdirs = trial % 2 == 1;
    if (subdirs)
      for (const char* d : {"original", "tampered", "mask"}) fs::create_directories(dir / d);
    int n_equal = 0;
    for (int i = 0; i < 5; ++i) {
      const int h = 8 + static_cast<int>(rng() % 12), w = 8 + static_cast<int>(rng() % 12);
      const bool equal = rng() % 2 == 0;
      const int h2 = equal ? h : h + 1 + static_cast<int>(rng() % 3);
      n_equal += equal;
      const std::string id = "p" + std::to_string(i);
      if (subdirs) {
        write_png(dir / "original" / (id + ".png"), testing::random_image(rng, h, w));
        write_png(dir / "tampered" / (id + ".png"), testing::random_image(rng, h2, w));
      } else {
        write_pair(dir, id, h, w, h2, w, rng, false);
      }
    }
    ScanOptions opt;
    opt.layout = subdirs ? "subdirs" : "suffix";
    if (n_equal == 0) {
      CHECK_THROWS_AS(scan_pairs(dir, opt), std::runtime_error);
      continue;
    }
    const ScanResult res = scan_pairs(dir, opt);
    CHECK(res.manifest.records.size() == static_cast<std::size_t>(n_equal));
    CHECK(res.skipped.size() == static_cast<std::size_t>(5 - n_equal));
    for (const auto& r : res.manifest.records) {
      const ImagePair p = load_pair(r);
      CHECK(p.original.same_size(p.tampered));
    }
  }
}

TEST_CASE("split assignment is seeded and respects fractions") {
  const fs::path dir = testing::scratch_dir("scan_split");
  std::mt19937_64 rng(6);
  for (int i = 0; i < 16; ++i) write_pair(dir, "s" + std::to_string(i), 8, 8, 8, 8, rng);
  ScanOptions opt;
  opt.val_fraction = 0.125;
  opt.test_fraction = 0.25;
  opt.seed = 9;
  const auto a = scan_pairs(dir, opt).manifest;
  const auto b = scan_pairs(dir, opt).manifest;
  CHECK(a.split(Split::test).size() == 4);
  CHECK(a.split(Split::val).size() == 2);
  CHECK(a.split(Split::train).size() == 10);
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].split == b.records[i].split);
}

TEST_CASE("manifest round trip and validation") {
  const fs::path dir = testing::scratch_dir("manifest");
  std::mt19937_64 rng(7);
  write_pair(dir, "m0", 12, 10, 12, 10, rng);
  write_pair(dir, "m1", 12, 10, 12, 10, rng, false);
  DatasetManifest m = scan_pairs(dir).manifest;
  write_manifest(dir / "manifest.jsonl", m);
  const DatasetManifest back = read_manifest(dir / "manifest.jsonl");
  REQUIRE(back.records.size() == m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    CHECK(back.records[i].pair_id == m.records[i].pair_id);
    CHECK(back.records[i].original_path == m.records[i].original_path);
    CHECK(back.records[i].mask_path == m.records[i].mask_path);
    CHECK(back.records[i].width == 10);
    CHECK(back.records[i].height == 12);
    CHECK(back.records[i].split == m.records[i].split);
  }

  DatasetManifest dup = m;
  dup.records[1].pair_id = dup.records[0].pair_id;
  CHECK_THROWS_WITH_AS(dup.validate(false), doctest::Contains("duplicate"), std::runtime_error);
  DatasetManifest unmasked = m;
  for (auto& r : unmasked.records)
    if (!r.mask_path) r.split = Split::train;
  CHECK_THROWS_WITH_AS(unmasked.validate(false), doctest::Contains("no mask"), std::runtime_error);
  DatasetManifest missing = m;
  missing.records[0].original_path = (dir / "gone.png").string();
  CHECK_THROWS_WITH_AS(missing.validate(true), doctest::Contains("gone.png"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_pair(missing.records[0]), doctest::Contains("gone.png"), std::runtime_error);

  DatasetManifest wrong_dims = m;
  wrong_dims.records[0].width = 11;
  CHECK_THROWS_WITH_AS(load_pair(wrong_dims.records[0]), doctest::Contains("dimension mismatch"), std::runtime_error);

  std::ofstream(dir / "broken.jsonl") << "{\"pair_id\": 3}\n";
  CHECK_THROWS_AS(read_manifest(dir / "broken.jsonl"), std::runtime_error);
}

TEST_CASE("load_pair returns manifest dimensions and replicates grayscale") {
  const fs::path dir = testing::scratch_dir("gray");
  cv::Mat gray(9, 11, CV_8UC1);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 11; ++x) gray.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(10 * y + x);
  cv::imwrite((dir / "g_orig.png").string(), gray);
  cv::imwrite((dir / "g_tamp.png").string(), gray);
  const auto m = scan_pairs(dir).manifest;
  const ImagePair p = load_pair(m.records.at(0));
  CHECK(p.original.height == 9);
  CHECK(p.original.width == 11);
  CHECK(p.original.channels == 3);
  for (int c = 0; c < 3; ++c) CHECK(p.original.at(4, 7)[c] == 47);
}

TEST_CASE("16-bit input keeps the high byte") {
  const fs::path dir = testing::scratch_dir("sixteen");
  cv::Mat img(8, 64, CV_16UC3);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 64; ++x) {
      const auto v = static_cast<std::uint16_t>(x * 1031 + y * 37);
      img.at<cv::Vec<std::uint16_t, 3>>(y, x) = {v, static_cast<std::uint16_t>(65535 - v), static_cast<std::uint16_t>(v / 2)};
    }
  REQUIRE(cv::imwrite((dir / "grad.png").string(), img));
  const Image8 got = read_image_rgb(dir / "grad.png");
  REQUIRE(got.channels == 3);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 64; ++x) {
      const auto px = img.at<cv::Vec<std::uint16_t, 3>>(y, x);  // stored B, G, R
      CHECK(got.at(y, x)[0] == (px[2] >> 8));
      CHECK(got.at(y, x)[1] == (px[1] >> 8));
      CHECK(got.at(y, x)[2] == (px[0] >> 8));
    }
  CHECK(truncate_to_8bit({0, 255, 256, 65535, 0x1234}) == std::vector<std::uint8_t>{0, 0, 1, 255, 0x12});
}

TEST_CASE("mask files are exactly {0,255}") {
  const fs::path dir = testing::scratch_dir("maskio");
  cv::Mat raw(4, 4, CV_8UC1, cv::Scalar(0));
  raw.at<std::uint8_t>(1, 2) = 1;
  raw.at<std::uint8_t>(3, 3) = 200;
  cv::imwrite((dir / "raw.png").string(), raw);
  const Mask m = read_mask(dir / "raw.png");
  CHECK(m.is_binary());
  CHECK(m.at(1, 2) == 255);
  CHECK(m.at(3, 3) == 255);
  CHECK(m.at(0, 0) == 0);
  Mask bad(2, 2);
  bad.data[0] = 7;
  CHECK_THROWS_AS(write_mask_png(dir / "bad.png", bad), std::invalid_argument);
}

TEST_CASE("synth_pair area arithmetic and determinism") {
  TamperSpec spec;
  spec.op = TamperOp::paste_rect;
  spec.region = {10, 10, 20, 20};
  const SynthResult a = synth_pair(0, 64, 64, spec);
  CHECK(white_fraction(a.mask) == doctest::Approx(400.0 / 4096.0).epsilon(1e-15));
  const SynthResult b = synth_pair(0, 64, 64, spec);
  CHECK(a.pair.original.data == b.pair.original.data);
  CHECK(a.pair.tampered.data == b.pair.tampered.data);
  CHECK(a.mask.data == b.mask.data);
  CHECK(a.pair.pair_id == "synth_0");

  // pixels outside the region are untouched without degradation
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (!a.mask.at(y, x))
        for (int c = 0; c < 3; ++c) CHECK(a.pair.original.at(y, x)[c] == a.pair.tampered.at(y, x)[c]);
}

TEST_CASE("synth_pair preconditions") {
  TamperSpec spec;
  spec.region = {0, 0, 0, 0};
  spec.degradation.jpeg_quality = 30;
  CHECK_THROWS_AS(synth_pair(0, 64, 64, spec), std::invalid_argument);
  spec.region = {50, 50, 20, 20};
  CHECK_THROWS_WITH_AS(synth_pair(0, 64, 64, spec), doctest::Contains("outside"), std::invalid_argument);
  spec.region = {0, 0, 60, 60};  // 88% of the image
  CHECK_THROWS_AS(synth_pair(0, 64, 64, spec), std::invalid_argument);
  spec.region = {0, 0, 8, 8};
  CHECK_THROWS_AS(synth_pair(0, 12, 12, spec), std::invalid_argument);
}

TEST_CASE("random specs give valid masks for every op") {
  std::set<TamperOp> seen;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const TamperSpec spec = random_tamper_spec(seed, 48, 64, {});
    seen.insert(spec.op);
    const SynthResult s = synth_pair(seed, 48, 64, spec);
    const double f = white_fraction(s.mask);
    CHECK(f >= 0.01);
    CHECK(f <= 0.70);
    CHECK(filter_valid(s.mask).valid);
    CHECK(s.pair.original.data != s.pair.tampered.data);
  }
  CHECK(seen.size() == 4);
  for (TamperOp op : {TamperOp::paste_rect, TamperOp::paste_ellipse, TamperOp::copy_move, TamperOp::inpaint_blur})
    CHECK(parse_tamper_op(tamper_op_name(op)) == op);
  CHECK_THROWS_AS(parse_tamper_op("smudge"), std::invalid_argument);
}

TEST_CASE("degradation leaves the mask alone") {
  TamperSpec spec = random_tamper_spec(11, 64, 64, {});
  const SynthResult clean = synth_pair(11, 64, 64, spec);
  spec.degradation = {30, 1.0};
  const SynthResult dirty = synth_pair(11, 64, 64, spec);
  CHECK(clean.mask.data == dirty.mask.data);
  CHECK(clean.pair.original.data == dirty.pair.original.data);
  CHECK(clean.pair.tampered.data != dirty.pair.tampered.data);
}

TEST_CASE("degrade identity, parameter checks and jpeg change") {
  std::mt19937_64 rng(12);
  const Image8 img = testing::random_image(rng, 32, 40);
  CHECK(degrade(img, 100, 0.0).data == img.data);
  CHECK_THROWS_AS(degrade(img, 9, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(degrade(img, 101, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(degrade(img, 50, -0.5), std::invalid_argument);

  const Image8 q30 = degrade(img, 30, 0.0);
  CHECK(q30.height == img.height);
  CHECK(q30.width == img.width);
  double mad = 0;
  for (std::size_t i = 0; i < img.data.size(); ++i) mad += std::abs(int(img.data[i]) - int(q30.data[i]));
  mad /= static_cast<double>(img.data.size());
  CHECK(mad > 0.0);
  CHECK(degrade(img, 30, 0.0).data == q30.data);
}

TEST_CASE("gaussian blur matches a direct convolution oracle") {
  Image8 impulse(31, 31, 3, 0);
  for (int c = 0; c < 3; ++c) impulse.at(15, 15)[c] = 255;
  const Image8 blurred = gaussian_blur(impulse, 2.0);
  const std::vector<double> ref = direct_blur(impulse, 2.0, 0);
  double mass = 0;
  for (int y = 0; y < 31; ++y)
    for (int x = 0; x < 31; ++x) {
      const double r = ref[static_cast<std::size_t>(y) * 31 + x];
      CHECK(std::abs(blurred.at(y, x)[0] - r) <= 0.5 + 1e-9);
      mass += r;
    }
  CHECK(blurred.at(15, 15)[0] < 255);
  CHECK(std::abs(mass - 255.0) <= 0.01 * 255.0);
  // normalised taps and reflected borders keep a flat image flat
  const Image8 flat(9, 13, 3, 77);
  CHECK(gaussian_blur(flat, 2.5).data == flat.data);

  std::mt19937_64 rng(13);
  const Image8 img = testing::random_image(rng, 12, 17);
  const Image8 got = gaussian_blur(img, 1.3);
  for (int c = 0; c < 3; ++c) {
    const auto r = direct_blur(img, 1.3, c);
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 17; ++x) CHECK(std::abs(got.at(y, x)[c] - r[static_cast<std::size_t>(y) * 17 + x]) <= 0.5 + 1e-9);
  }
  const auto taps = gaussian_taps(2.0);
  CHECK(taps.size() == 13);
  double s = 0;
  for (double t : taps) s += t;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gaussian_blur(img, 0.0).data == img.data);
}

}
