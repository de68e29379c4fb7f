// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/evaluation.hpp"

#include <fstream>
#include <stdexcept>

#include "maskforge/kernels.hpp"

namespace maskforge {

ConfusionCounts confusion(const Mask& pred, const Mask& gt) {
  if (pred.height != gt.height || pred.width != gt.width)
    throw std::invalid_argument("confusion: mask sizes differ");
  if (!pred.is_binary() || !gt.is_binary()) throw std::invalid_argument("confusion: masks must be binary");
  const auto c = kernels::active().confusion(pred.data.data(), gt.data.data(), pred.pixels());
  return {c[0], c[1], c[2], c[3]};
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("metrics: no pixels evaluated");
  MetricsReport r;
  r.counts = c;
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = (r.precision + r.recall) > 0 ? 2.0 * (r.precision * r.recall) / (r.precision + r.recall) : 0.0;
  r.iou = ratio(c.tp, c.tp + c.fn + c.fp);
  r.accuracy = ratio(c.tp + c.tn, c.total());
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) {
    r.degenerate_negative = true;
    r.f1 = 1.0;
    r.iou = 1.0;
  }
  return r;
}

MetricsReport evaluate_dataset(const std::vector<ManifestRecord>& records, const std::filesystem::path& pred_dir,
                               const std::string& suffix) {
  std::vector<std::string> missing;
  for (const auto& r : records)
    if (!std::filesystem::exists(pred_dir / (r.pair_id + suffix))) missing.push_back(r.pair_id);
  if (!missing.empty()) {
    std::string msg = "missing predictions for " + std::to_string(missing.size()) + " pair(s):";
    for (const auto& id : missing) msg += " " + id;
    throw std::runtime_error(msg);
  }
  if (records.empty()) throw std::runtime_error("evaluate_dataset: no records");

  ConfusionCounts pooled;
  std::vector<ImageMetrics> rows;
  for (const auto& r : records) {
    const Mask pred = read_mask(pred_dir / (r.pair_id + suffix));
    const Mask gt = load_mask(r);
    const ConfusionCounts c = confusion(pred, gt);
    pooled += c;
    const MetricsReport m = metrics(c);
    rows.push_back({r.pair_id, c, m.precision, m.recall, m.f1, m.iou, m.accuracy, m.degenerate_negative});
  }
  MetricsReport report = metrics(pooled);
  report.per_image = std::move(rows);
  return report;
}

namespace {

nlohmann::json counts_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

}  // namespace

nlohmann::json report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["schema"] = "maskforge.eval";
  j["version"] = kReportVersion;
  j["averaging"] = "micro";
  j["micro"] = {{"counts", counts_json(report.counts)},
                {"precision", report.precision},
                {"recall", report.recall},
                {"f1", report.f1},
                {"iou", report.iou},
                {"accuracy", report.accuracy},
                {"degenerate_negative", report.degenerate_negative}};
  j["per_image"] = nlohmann::json::array();
  for (const auto& m : report.per_image) {
    j["per_image"].push_back({{"pair_id", m.pair_id},
                              {"counts", counts_json(m.counts)},
                              {"precision", m.precision},
                              {"recall", m.recall},
                              {"f1", m.f1},
                              {"iou", m.iou},
                              {"accuracy", m.accuracy},
                              {"degenerate_negative", m.degenerate_negative}});
  }
  return j;
}

void write_report(const std::filesystem::path& path, const MetricsReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write report " + path.string());
  os << report_to_json(report).dump(2) << '\n';
}

}  // namespace maskforge
