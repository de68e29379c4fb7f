// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "maskforge/tensor.hpp"

namespace maskforge {

struct ImagePair {
  std::string pair_id;
  Image8 original;
  Image8 tampered;
};

// ---------------------------------------------------------------------------
// Image files

/// Decodes PNG/JPEG into 8-bit RGB. Grayscale is replicated to three
/// channels, alpha is dropped and 16-bit samples keep their high byte.
Image8 read_image_rgb(const std::filesystem::path& path);
/// Reads a single-channel mask; any nonzero value becomes 255.
Mask read_mask(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image8& img);
/// Writes an 8-bit single-channel PNG with values exactly {0, 255}.
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

/// 16-bit to 8-bit by high-byte truncation (v >> 8).
std::vector<std::uint8_t> truncate_to_8bit(const std::vector<std::uint16_t>& samples);

// ---------------------------------------------------------------------------
// Manifest

enum class Split { train, val, test };
const char* split_name(Split s);
Split parse_split(const std::string& s);

struct ManifestRecord {
  std::string pair_id;
  std::string original_path;
  std::string tampered_path;
  std::optional<std::string> mask_path;
  int width = 0;
  int height = 0;
  Split split = Split::test;
  // Original/tampered roles come from file order, not from verification.
  bool roles_assumed = true;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;

  /// Checks unique ids, masks on train/val records and (optionally) that
  /// every referenced file exists. Throws on the first violation.
  void validate(bool check_files = true) const;
  std::vector<ManifestRecord> split(Split s) const;
};

/// One JSON object per line, UTF-8.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct SkippedPair {
  std::string pair_id;
  std::string reason;
};

struct ScanOptions {
  std::string layout = "suffix";  // "suffix" or "subdirs"
  double val_fraction = 0.125;
  double test_fraction = 0.25;
  std::uint64_t seed = 0;
};

struct ScanResult {
  DatasetManifest manifest;
  std::vector<SkippedPair> skipped;
};

/// Discovers pairs under root.
///
/// Layout "suffix": `<id>_orig.<ext>`, `<id>_tamp.<ext>`, optional
/// `<id>_mask.png`. Layout "subdirs": `original/<id>.<ext>`,
/// `tampered/<id>.<ext>`, optional `mask/<id>.png`.
///
/// Pairs that fail to decode or whose two images differ in size are listed in
/// `skipped`. Pairs without a mask always go to the test split; masked pairs
/// are shuffled with `seed` and split by the requested fractions.
ScanResult scan_pairs(const std::filesystem::path& root, const ScanOptions& options = {});

ImagePair load_pair(const ManifestRecord& record);
Mask load_mask(const ManifestRecord& record);

// ---------------------------------------------------------------------------
// Synthetic pairs

enum class TamperOp { paste_rect, paste_ellipse, copy_move, inpaint_blur };
const char* tamper_op_name(TamperOp op);
TamperOp parse_tamper_op(const std::string& s);

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct Degradation {
  int jpeg_quality = 100;
  double blur_sigma = 0.0;
};

struct TamperSpec {
  TamperOp op = TamperOp::paste_rect;
  Rect region;
  Degradation degradation;
};

struct SynthResult {
  ImagePair pair;
  Mask mask;
};

/// Deterministic in (seed, size, spec). The mask covers exactly the altered
/// region; degradation noise outside it is not tamper.
SynthResult synth_pair(std::uint64_t seed, int height, int width, const TamperSpec& spec);

/// Draws a spec whose mask fraction lies well inside [1%, 70%].
TamperSpec random_tamper_spec(std::uint64_t seed, int height, int width, Degradation degradation);

/// Textured RGB background used by synth_pair.
Image8 synth_background(std::uint64_t seed, int height, int width);

/// JPEG round trip at `jpeg_quality` (100 leaves the image untouched) then a
/// Gaussian blur of `blur_sigma` (0 disables it).
Image8 degrade(const Image8& image, int jpeg_quality, double blur_sigma);

/// Separable Gaussian blur, radius ceil(3 sigma), reflect-101 borders,
/// normalised taps, rounding to nearest.
Image8 gaussian_blur(const Image8& image, double sigma);
std::vector<double> gaussian_taps(double sigma);

}  // namespace maskforge
