// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <regex>
#include <set>
#include <stdexcept>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace maskforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Image files

std::vector<std::uint8_t> truncate_to_8bit(const std::vector<std::uint16_t>& samples) {
  std::vector<std::uint8_t> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = static_cast<std::uint8_t>(samples[i] >> 8);
  return out;
}

namespace {

cv::Mat decode_8bit(const fs::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED | cv::IMREAD_IGNORE_ORIENTATION);
  if (m.empty()) throw std::runtime_error("cannot decode image: " + path.string());
  if (m.depth() == CV_16U) {
    cv::Mat out(m.rows, m.cols, CV_8UC(m.channels()));
    const std::size_t n = m.total() * m.channels();
    cv::Mat cont = m.isContinuous() ? m : m.clone();
    const auto* src = cont.ptr<std::uint16_t>();
    auto* dst = out.ptr<std::uint8_t>();
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<std::uint8_t>(src[i] >> 8);
    m = out;
  } else if (m.depth() != CV_8U) {
    throw std::runtime_error("unsupported sample depth in " + path.string());
  }
  return m;
}

Image8 from_mat_rgb(const cv::Mat& m) {
  cv::Mat rgb;
  switch (m.channels()) {
    case 1: cv::cvtColor(m, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(m, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(m, rgb, cv::COLOR_BGRA2RGB); break;
    default: throw std::runtime_error("unsupported channel count");
  }
  Image8 img(rgb.rows, rgb.cols, 3);
  for (int y = 0; y < rgb.rows; ++y) std::copy_n(rgb.ptr<std::uint8_t>(y), rgb.cols * 3, img.at(y, 0));
  return img;
}

cv::Mat to_mat_bgr(const Image8& img) {
  if (img.channels == 1) {
    cv::Mat m(img.height, img.width, CV_8UC1);
    for (int y = 0; y < img.height; ++y) std::copy_n(img.at(y, 0), img.width, m.ptr<std::uint8_t>(y));
    return m;
  }
  if (img.channels != 3) throw std::invalid_argument("expected 1 or 3 channel image");
  cv::Mat rgb(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) std::copy_n(img.at(y, 0), img.width * 3, rgb.ptr<std::uint8_t>(y));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

}  // namespace

Image8 read_image_rgb(const fs::path& path) { return from_mat_rgb(decode_8bit(path)); }

Mask read_mask(const fs::path& path) {
  cv::Mat m = decode_8bit(path);
  if (m.channels() != 1) {
    cv::Mat g;
    cv::cvtColor(m, g, m.channels() == 4 ? cv::COLOR_BGRA2GRAY : cv::COLOR_BGR2GRAY);
    m = g;
  }
  Mask mask(m.rows, m.cols, MaskSource::ground_truth);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) mask.at(y, x) = row[x] != 0 ? 255 : 0;
  }
  return mask;
}

void write_png(const fs::path& path, const Image8& img) {
  ensure_parent(path);
  if (!cv::imwrite(path.string(), to_mat_bgr(img))) throw std::runtime_error("cannot write " + path.string());
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  if (!mask.is_binary()) throw std::invalid_argument("mask is not binary: " + path.string());
  Image8 img(mask.height, mask.width, 1);
  img.data = mask.data;
  write_png(path, img);
}

// ---------------------------------------------------------------------------
// Manifest

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "test";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + s + "'");
}

void DatasetManifest::validate(bool check_files) const {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.pair_id).second) throw std::runtime_error("duplicate pair_id " + r.pair_id);
    if (r.split != Split::test && !r.mask_path)
      throw std::runtime_error("record " + r.pair_id + " in split " + split_name(r.split) + " has no mask");
    if (!check_files) continue;
    for (const std::string* p : {&r.original_path, &r.tampered_path}) {
      if (!fs::exists(*p)) throw std::runtime_error("missing file " + *p);
    }
    if (r.mask_path && !fs::exists(*r.mask_path)) throw std::runtime_error("missing file " + *r.mask_path);
  }
}

std::vector<ManifestRecord> DatasetManifest::split(Split s) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records)
    if (r.split == s) out.push_back(r);
  return out;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  ensure_parent(path);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write manifest " + path.string());
  for (const auto& r : manifest.records) {
    json j;
    j["pair_id"] = r.pair_id;
    j["original_path"] = r.original_path;
    j["tampered_path"] = r.tampered_path;
    j["mask_path"] = r.mask_path ? json(*r.mask_path) : json(nullptr);
    j["width"] = r.width;
    j["height"] = r.height;
    j["split"] = split_name(r.split);
    j["roles_assumed"] = r.roles_assumed;
    os << j.dump() << '\n';
  }
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read manifest " + path.string());
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q.string() : (base / q).string();
  };
  DatasetManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ManifestRecord r;
      r.pair_id = j.at("pair_id").get<std::string>();
      r.original_path = resolve(j.at("original_path").get<std::string>());
      r.tampered_path = resolve(j.at("tampered_path").get<std::string>());
      if (j.contains("mask_path") && !j["mask_path"].is_null())
        r.mask_path = resolve(j["mask_path"].get<std::string>());
      r.width = j.at("width").get<int>();
      r.height = j.at("height").get<int>();
      r.split = parse_split(j.at("split").get<std::string>());
      r.roles_assumed = j.value("roles_assumed", true);
      m.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return m;
}

namespace {

struct Candidate {
  fs::path original, tampered, mask;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_image_ext(const std::string& ext) {
  const std::string e = lower(ext);
  return e == ".png" || e == ".jpg" || e == ".jpeg";
}

std::map<std::string, Candidate> discover_suffix(const fs::path& root) {
  static const std::regex re(R"(^(.+)_(orig|tamp|mask)$)");
  std::map<std::string, Candidate> found;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_regular_file() || !is_image_ext(entry.path().extension().string())) continue;
    std::smatch m;
    const std::string stem = entry.path().stem().string();
    if (!std::regex_match(stem, m, re)) continue;
    Candidate& c = found[m[1].str()];
    const std::string role = m[2].str();
    const fs::path p = fs::absolute(entry.path());
    if (role == "orig") c.original = p;
    else if (role == "tamp") c.tampered = p;
    else c.mask = p;
  }
  return found;
}

std::map<std::string, Candidate> discover_subdirs(const fs::path& root) {
  std::map<std::string, Candidate> found;
  const std::pair<const char*, fs::path Candidate::*> roles[] = {
      {"original", &Candidate::original}, {"tampered", &Candidate::tampered}, {"mask", &Candidate::mask}};
  for (const auto& [dir, member] : roles) {
    const fs::path d = root / dir;
    if (!fs::is_directory(d)) continue;
    for (const auto& entry : fs::directory_iterator(d)) {
      if (!entry.is_regular_file() || !is_image_ext(entry.path().extension().string())) continue;
      found[entry.path().stem().string()].*member = fs::absolute(entry.path());
    }
  }
  return found;
}

}  // namespace

ScanResult scan_pairs(const fs::path& root, const ScanOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw std::runtime_error("cannot read root directory " + root.string());
  if (options.val_fraction < 0 || options.test_fraction < 0 || options.val_fraction + options.test_fraction > 1.0)
    throw std::invalid_argument("split fractions must be nonnegative and sum to at most 1");

  std::map<std::string, Candidate> found;
  if (options.layout == "suffix") found = discover_suffix(root);
  else if (options.layout == "subdirs") found = discover_subdirs(root);
  else throw std::invalid_argument("unknown layout '" + options.layout + "'");

  ScanResult result;
  for (const auto& [id, c] : found) {
    if (c.original.empty() || c.tampered.empty()) {
      result.skipped.push_back({id, c.original.empty() ? "missing original" : "missing tampered"});
      continue;
    }
    Image8 a, b;
    try {
      a = read_image_rgb(c.original);
      b = read_image_rgb(c.tampered);
    } catch (const std::exception& e) {
      result.skipped.push_back({id, std::string("decode failure: ") + e.what()});
      continue;
    }
    if (!a.same_size(b)) {
      result.skipped.push_back({id, "size mismatch " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                                        " vs " + std::to_string(b.width) + "x" + std::to_string(b.height)});
      continue;
    }
    if (a.height < 8 || a.width < 8) {
      result.skipped.push_back({id, "smaller than 8x8"});
      continue;
    }
    ManifestRecord r;
    r.pair_id = id;
    r.original_path = c.original.string();
    r.tampered_path = c.tampered.string();
    if (!c.mask.empty()) {
      try {
        const Mask m = read_mask(c.mask);
        if (m.height != a.height || m.width != a.width) {
          result.skipped.push_back({id, "mask size mismatch"});
          continue;
        }
      } catch (const std::exception& e) {
        result.skipped.push_back({id, std::string("mask decode failure: ") + e.what()});
        continue;
      }
      r.mask_path = c.mask.string();
    }
    r.width = a.width;
    r.height = a.height;
    r.split = Split::test;
    result.manifest.records.push_back(std::move(r));
  }

  if (result.manifest.records.empty()) {
    std::string summary = "no valid pairs under " + root.string() + " (skipped " +
                          std::to_string(result.skipped.size()) + ")";
    for (std::size_t i = 0; i < result.skipped.size() && i < 5; ++i)
      summary += "; " + result.skipped[i].pair_id + ": " + result.skipped[i].reason;
    throw std::runtime_error(summary);
  }

  std::vector<ManifestRecord*> masked;
  for (auto& r : result.manifest.records)
    if (r.mask_path) masked.push_back(&r);
  std::mt19937_64 rng(options.seed);
  for (std::size_t i = masked.size(); i > 1; --i) std::swap(masked[i - 1], masked[rng() % i]);
  const auto n = static_cast<double>(masked.size());
  const auto n_test = static_cast<std::size_t>(std::llround(options.test_fraction * n));
  const auto n_val = std::min(masked.size() - n_test, static_cast<std::size_t>(std::llround(options.val_fraction * n)));
  for (std::size_t i = 0; i < masked.size(); ++i)
    masked[i]->split = i < n_test ? Split::test : (i < n_test + n_val ? Split::val : Split::train);
  return result;
}

ImagePair load_pair(const ManifestRecord& record) {
  ImagePair p;
  p.pair_id = record.pair_id;
  p.original = read_image_rgb(record.original_path);
  p.tampered = read_image_rgb(record.tampered_path);
  for (const Image8* img : {&p.original, &p.tampered}) {
    if (img->width != record.width || img->height != record.height)
      throw std::runtime_error("dimension mismatch for " + record.pair_id + ": manifest " +
                               std::to_string(record.width) + "x" + std::to_string(record.height) + ", file " +
                               std::to_string(img->width) + "x" + std::to_string(img->height));
  }
  return p;
}

Mask load_mask(const ManifestRecord& record) {
  if (!record.mask_path) throw std::runtime_error("record " + record.pair_id + " has no mask");
  Mask m = read_mask(*record.mask_path);
  if (m.width != record.width || m.height != record.height)
    throw std::runtime_error("mask dimension mismatch for " + record.pair_id);
  return m;
}

// ---------------------------------------------------------------------------
// Degradation

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += taps[i + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Image8 gaussian_blur(const Image8& image, double sigma) {
  if (sigma < 0) throw std::invalid_argument("blur sigma must be >= 0");
  if (sigma == 0) return image;
  const std::vector<double> taps = gaussian_taps(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int h = image.height, w = image.width, ch = image.channels;
  std::vector<double> tmp(static_cast<std::size_t>(h) * w * ch, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += taps[k + radius] * image.at(y, reflect101(x + k, w))[c];
        tmp[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
      }
  Image8 out(h, w, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k)
          acc += taps[k + radius] * tmp[(static_cast<std::size_t>(reflect101(y + k, h)) * w + x) * ch + c];
        out.at(y, x)[c] = to_byte(acc);
      }
  return out;
}

Image8 degrade(const Image8& image, int jpeg_quality, double blur_sigma) {
  if (jpeg_quality < 10 || jpeg_quality > 100)
    throw std::invalid_argument("jpeg_quality must be in [10,100], got " + std::to_string(jpeg_quality));
  if (!(blur_sigma >= 0)) throw std::invalid_argument("blur sigma must be >= 0");
  Image8 out = image;
  if (jpeg_quality < 100) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".jpg", to_mat_bgr(image), buf, {cv::IMWRITE_JPEG_QUALITY, jpeg_quality}))
      throw std::runtime_error("jpeg encode failed");
    cv::Mat dec = cv::imdecode(buf, image.channels == 1 ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR);
    if (image.channels == 1) {
      for (int y = 0; y < dec.rows; ++y) std::copy_n(dec.ptr<std::uint8_t>(y), dec.cols, out.at(y, 0));
    } else {
      out = from_mat_rgb(dec);
    }
  }
  return gaussian_blur(out, blur_sigma);
}

// ---------------------------------------------------------------------------
// Synthetic pairs

const char* tamper_op_name(TamperOp op) {
  switch (op) {
    case TamperOp::paste_rect: return "paste_rect";
    case TamperOp::paste_ellipse: return "paste_ellipse";
    case TamperOp::copy_move: return "copy_move";
    case TamperOp::inpaint_blur: return "inpaint_blur";
  }
  return "paste_rect";
}

TamperOp parse_tamper_op(const std::string& s) {
  for (TamperOp op : {TamperOp::paste_rect, TamperOp::paste_ellipse, TamperOp::copy_move, TamperOp::inpaint_blur})
    if (s == tamper_op_name(op)) return op;
  throw std::invalid_argument("unknown tamper op '" + s + "'");
}

Image8 synth_background(std::uint64_t seed, int height, int width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

  std::vector<double> img(static_cast<std::size_t>(height) * width * 3);
  double base[3];
  for (double& b : base) b = uni(60, 190);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) img[(static_cast<std::size_t>(y) * width + x) * 3 + c] = base[c];

  // oriented gratings, from coarse shading to fine texture
  const int gratings = 4;
  for (int g = 0; g < gratings; ++g) {
    const double freq = uni(0.03, 0.35);
    const double theta = uni(0, std::numbers::pi);
    const double phase = uni(0, 2 * std::numbers::pi);
    const double amp = uni(6, 26);
    double cw[3];
    for (double& c : cw) c = uni(0.4, 1.0);
    const double fx = std::cos(theta) * freq * 2 * std::numbers::pi;
    const double fy = std::sin(theta) * freq * 2 * std::numbers::pi;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double s = amp * std::sin(fx * x + fy * y + phase);
        for (int c = 0; c < 3; ++c) img[(static_cast<std::size_t>(y) * width + x) * 3 + c] += cw[c] * s;
      }
  }

  // soft-edged blobs standing in for objects
  const int blobs = 3 + static_cast<int>(rng() % 4);
  for (int b = 0; b < blobs; ++b) {
    const double cx = uni(0, width), cy = uni(0, height);
    const double rx = uni(3, std::max(4.0, width / 5.0)), ry = uni(3, std::max(4.0, height / 5.0));
    double off[3];
    for (double& o : off) o = uni(-70, 70);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        const double r = std::sqrt(dx * dx + dy * dy);
        const double a = std::clamp(1.5 - r, 0.0, 1.0);
        if (a <= 0) continue;
        for (int c = 0; c < 3; ++c) img[(static_cast<std::size_t>(y) * width + x) * 3 + c] += a * off[c];
      }
  }

  std::normal_distribution<double> noise(0.0, 3.0);
  Image8 out(height, width, 3);
  for (std::size_t i = 0; i < img.size(); ++i) out.data[i] = to_byte(img[i] + noise(rng));
  return out;
}

namespace {

Mask region_mask(int h, int w, const Rect& r, bool ellipse) {
  Mask m(h, w, MaskSource::ground_truth);
  const double cx = r.x + r.width / 2.0, cy = r.y + r.height / 2.0;
  const double rx = r.width / 2.0, ry = r.height / 2.0;
  for (int y = r.y; y < r.y + r.height; ++y)
    for (int x = r.x; x < r.x + r.width; ++x) {
      if (ellipse) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        if (dx * dx + dy * dy > 1.0) continue;
      }
      m.at(y, x) = 255;
    }
  return m;
}

Rect copy_source(std::mt19937_64& rng, int h, int w, const Rect& dst) {
  // farthest-apart candidate among a few draws, so the moved content differs
  Rect best = dst;
  long best_d = -1;
  for (int t = 0; t < 16; ++t) {
    Rect s = dst;
    s.x = static_cast<int>(rng() % static_cast<std::uint64_t>(w - dst.width + 1));
    s.y = static_cast<int>(rng() % static_cast<std::uint64_t>(h - dst.height + 1));
    const long d = std::labs(s.x - dst.x) + std::labs(s.y - dst.y);
    if (d > best_d) {
      best_d = d;
      best = s;
    }
  }
  return best;
}

}  // namespace

SynthResult synth_pair(std::uint64_t seed, int height, int width, const TamperSpec& spec) {
  if (height < 16 || width < 16) throw std::invalid_argument("synth_pair needs size >= 16x16");
  const Rect& r = spec.region;
  if (r.width <= 0 || r.height <= 0 || r.x < 0 || r.y < 0 || r.x + r.width > width || r.y + r.height > height)
    throw std::invalid_argument("tamper region outside image bounds");

  SynthResult out;
  out.mask = region_mask(height, width, r, spec.op == TamperOp::paste_ellipse);
  const double fraction = static_cast<double>(std::count(out.mask.data.begin(), out.mask.data.end(), 255)) /
                          static_cast<double>(out.mask.pixels());
  if (fraction < 0.01 || fraction > 0.70)
    throw std::invalid_argument("tamper region covers " + std::to_string(fraction) +
                                " of the image; must be within [0.01, 0.70]");

  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
  const Image8 original = synth_background(rng(), height, width);
  Image8 tampered = original;

  switch (spec.op) {
    case TamperOp::paste_rect:
    case TamperOp::paste_ellipse: {
      const Image8 donor = synth_background(rng(), height, width);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
          if (out.mask.at(y, x)) std::copy_n(donor.at(y, x), 3, tampered.at(y, x));
      break;
    }
    case TamperOp::copy_move: {
      const Rect src = copy_source(rng, height, width, r);
      for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x)
          std::copy_n(original.at(src.y + y, src.x + x), 3, tampered.at(r.y + y, r.x + x));
      break;
    }
    case TamperOp::inpaint_blur: {
      const Image8 smooth = gaussian_blur(original, 4.0);
      for (int y = r.y; y < r.y + r.height; ++y)
        for (int x = r.x; x < r.x + r.width; ++x) std::copy_n(smooth.at(y, x), 3, tampered.at(y, x));
      break;
    }
  }

  out.pair.pair_id = "synth_" + std::to_string(seed);
  out.pair.original = original;
  out.pair.tampered = degrade(tampered, spec.degradation.jpeg_quality, spec.degradation.blur_sigma);
  return out;
}

TamperSpec random_tamper_spec(std::uint64_t seed, int height, int width, Degradation degradation) {
  std::mt19937_64 rng(seed ^ 0xA5A5A5A55A5A5A5AULL);
  TamperSpec spec;
  spec.op = static_cast<TamperOp>(rng() % 4);
  spec.degradation = degradation;
  // sides between 18% and 45% of the image, giving area fractions ~3%..20%
  auto side = [&](int n) {
    const int lo = std::max(4, static_cast<int>(n * 0.18));
    const int hi = std::max(lo, static_cast<int>(n * 0.45));
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  spec.region.height = side(height);
  spec.region.width = side(width);
  spec.region.y = static_cast<int>(rng() % static_cast<std::uint64_t>(height - spec.region.height + 1));
  spec.region.x = static_cast<int>(rng() % static_cast<std::uint64_t>(width - spec.region.width + 1));
  return spec;
}

}  // namespace maskforge
