// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 1 runtime failure (one
// "error: ..." line on stderr), 2 usage error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maskforge/config.hpp"
#include "maskforge/evaluation.hpp"
#include "maskforge/ingestion.hpp"
#include "maskforge/kernels.hpp"
#include "maskforge/postprocess.hpp"
#include "maskforge/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace maskforge;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<ManifestRecord> select_split(const DatasetManifest& m, const std::string& split) {
  if (split == "all") return m.records;
  return m.split(parse_split(split));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------

struct PairArgs {
  std::string root, out, layout = "suffix";
  double val_fraction = ScanOptions{}.val_fraction;
  double test_fraction = ScanOptions{}.test_fraction;
  std::uint64_t seed = 0;
};

int cmd_pair(const PairArgs& a) {
  ScanOptions opt;
  opt.layout = a.layout;
  opt.val_fraction = a.val_fraction;
  opt.test_fraction = a.test_fraction;
  opt.seed = a.seed;
  const ScanResult res = scan_pairs(a.root, opt);
  if (fs::path(a.out).has_parent_path()) ensure_dir(fs::path(a.out).parent_path());
  write_manifest(a.out, res.manifest);
  for (const auto& s : res.skipped) std::cerr << "skipped " << s.pair_id << ": " << s.reason << "\n";
  std::cout << "pairs " << res.manifest.records.size() << " skipped " << res.skipped.size() << " train "
            << res.manifest.split(Split::train).size() << " val " << res.manifest.split(Split::val).size() << " test "
            << res.manifest.split(Split::test).size() << "\n";
  return 0;
}

struct SynthArgs {
  int n = 8, size = 64, jpeg_quality = 100;
  double blur = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  if (a.n < 1) throw UsageError("--n must be >= 1");
  ensure_dir(a.out);
  const fs::path out(a.out);
  std::ofstream index(out / "synth.jsonl");
  if (!index) throw std::runtime_error("cannot write " + (out / "synth.jsonl").string());
  for (int i = 0; i < a.n; ++i) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
    const TamperSpec spec = random_tamper_spec(seed, a.size, a.size, {a.jpeg_quality, a.blur});
    const SynthResult s = synth_pair(seed, a.size, a.size, spec);
    const std::string& id = s.pair.pair_id;
    write_png(out / (id + "_orig.png"), s.pair.original);
    write_png(out / (id + "_tamp.png"), s.pair.tampered);
    write_mask_png(out / (id + "_mask.png"), s.mask);
    index << json{{"pair_id", id},
                  {"op", tamper_op_name(spec.op)},
                  {"region", {spec.region.x, spec.region.y, spec.region.width, spec.region.height}},
                  {"jpeg_quality", a.jpeg_quality},
                  {"blur_sigma", a.blur}}
                 .dump()
          << "\n";
  }
  std::cout << "wrote " << a.n << " pairs to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string config, manifest, out, log;
  std::vector<std::string> settings;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig rc = a.config.empty() ? RunConfig{} : load_config(a.config);
  for (const auto& kv : a.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_setting(rc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed_set) rc.train.seed = a.seed;
  rc.train.validate();
  rc.model.grid.validate();
  const DatasetManifest manifest = read_manifest(a.manifest);

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    if (!log) throw std::runtime_error("cannot write " + a.log);
  }
  const TrainResult res = train(rc.train, rc.model, manifest, [&](const EpochLog& e) {
    const json row{{"epoch", e.epoch}, {"ce", e.ce}, {"mmd", e.mmd}, {"val_f1", e.val_f1}, {"lr", e.lr}};
    if (log) log << row.dump() << "\n" << std::flush;
    std::cerr << "epoch " << e.epoch << " ce " << e.ce << " mmd " << e.mmd << " val_f1 " << e.val_f1 << "\n";
  });
  if (fs::path(a.out).has_parent_path()) ensure_dir(fs::path(a.out).parent_path());
  save_checkpoint(a.out, res.best);
  std::cout << "best epoch " << res.best.epoch << " val_f1 " << res.best.best_val_f1 << " steps " << res.steps << "\n";
  return 0;
}

struct GenerateArgs {
  std::string ckpt, manifest, out, split = "test";
  double threshold = 0.5, scale = 1.0;
  bool baseline = false;
};

int cmd_generate(const GenerateArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const MaskModel model = restore(ckpt);
  const DatasetManifest manifest = read_manifest(a.manifest);
  manifest.validate();
  ensure_dir(a.out);
  const auto records = select_split(manifest, a.split);
  if (records.empty()) throw std::runtime_error("split '" + a.split + "' is empty");
  for (const auto& r : records) {
    const ImagePair pair = load_pair(r);
    write_mask_png(fs::path(a.out) / (r.pair_id + "_mask.png"), model.predict_mask(pair, a.threshold, a.scale, a.scale));
    if (a.baseline) write_mask_png(fs::path(a.out) / (r.pair_id + "_baseline.png"), baseline_subtract(pair));
  }
  std::cout << "generated " << records.size() << " masks in " << a.out << "\n";
  return 0;
}

struct FilterArgs {
  std::string in, report, suffix = "_mask.png";
};

int cmd_filter(const FilterArgs& a) {
  if (!fs::is_directory(a.in)) throw std::runtime_error("not a directory: " + a.in);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.in)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > a.suffix.size() && name.ends_with(a.suffix)) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no *" + a.suffix + " files in " + a.in);
  std::ofstream os(a.report);
  if (!os) throw std::runtime_error("cannot write " + a.report);
  int valid = 0;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    const FilterVerdict v = filter_valid(read_mask(f));
    valid += v.valid;
    os << json{{"pair_id", name.substr(0, name.size() - a.suffix.size())},
               {"fraction", v.fraction},
               {"verdict", v.valid ? "valid" : "invalid"},
               {"reason", filter_reason_name(v.reason)}}
              .dump()
       << "\n";
  }
  std::cout << "masks " << files.size() << " valid " << valid << " invalid " << files.size() - valid << "\n";
  return 0;
}

struct EvalArgs {
  std::string manifest, pred, out, split = "test", suffix = "_mask.png";
};

int cmd_eval(const EvalArgs& a) {
  const DatasetManifest manifest = read_manifest(a.manifest);
  const auto records = select_split(manifest, a.split);
  if (records.empty()) throw std::runtime_error("split '" + a.split + "' is empty");
  const MetricsReport rep = evaluate_dataset(records, a.pred, a.suffix);
  if (fs::path(a.out).has_parent_path()) ensure_dir(fs::path(a.out).parent_path());
  write_report(a.out, rep);
  std::printf("precision %.4f recall %.4f f1 %.4f iou %.4f accuracy %.4f\n", rep.precision, rep.recall, rep.f1,
              rep.iou, rep.accuracy);
  return 0;
}

struct PlotArgs {
  std::string manifest, pred, out, split = "test";
};

Image8 mask_to_rgb(const Mask& m) {
  Image8 img(m.height, m.width, 3);
  for (std::size_t i = 0; i < m.data.size(); ++i) std::fill_n(img.data.data() + 3 * i, 3, m.data[i]);
  return img;
}

// One row: original | tampered | baseline | model, separated by grey gutters.
Image8 panel_row(const std::vector<Image8>& tiles) {
  constexpr int kGutter = 4;
  const int h = tiles.front().height, w = tiles.front().width;
  Image8 out(h, static_cast<int>(tiles.size()) * (w + kGutter) - kGutter, 3, 128);
  for (std::size_t t = 0; t < tiles.size(); ++t)
    for (int y = 0; y < h; ++y)
      std::copy_n(tiles[t].at(y, 0), 3 * w, out.at(y, static_cast<int>(t) * (w + kGutter)));
  return out;
}

int cmd_plot(const PlotArgs& a) {
  const DatasetManifest manifest = read_manifest(a.manifest);
  const auto records = select_split(manifest, a.split);
  if (records.empty()) throw std::runtime_error("split '" + a.split + "' is empty");
  ensure_dir(a.out);
  const fs::path pred(a.pred);
  for (const auto& r : records) {
    const ImagePair pair = load_pair(r);
    const fs::path model_path = pred / (r.pair_id + "_mask.png");
    const fs::path base_path = pred / (r.pair_id + "_baseline.png");
    if (!fs::exists(model_path)) throw std::runtime_error("missing prediction " + model_path.string());
    const Mask base = fs::exists(base_path) ? read_mask(base_path) : baseline_subtract(pair);
    write_png(fs::path(a.out) / (r.pair_id + "_panel.png"),
              panel_row({pair.original, pair.tampered, mask_to_rgb(base), mask_to_rgb(read_mask(model_path))}));
  }
  std::cout << "wrote " << records.size() << " panels to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maskforge: tamper-mask generation for image pairs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "maskforge 1.0 (" + std::string(kernels::isa_name(kernels::active().isa)) + ")");

  PairArgs pa;
  auto* pair = app.add_subcommand("pair", "discover image pairs and write a manifest");
  pair->add_option("--root", pa.root, "directory to scan")->required();
  pair->add_option("--out", pa.out, "manifest path (JSONL)")->required();
  pair->add_option("--layout", pa.layout, "suffix | subdirs")->check(CLI::IsMember({"suffix", "subdirs"}));
  pair->add_option("--val-fraction", pa.val_fraction, "share of masked pairs for validation");
  pair->add_option("--test-fraction", pa.test_fraction, "share of masked pairs for test");
  pair->add_option("--seed", pa.seed, "split shuffle seed");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "write synthetic tampered pairs");
  synth->add_option("--n", sa.n, "number of pairs");
  synth->add_option("--size", sa.size, "image side in pixels")->check(CLI::Range(16, 4096));
  synth->add_option("--seed", sa.seed, "first pair seed");
  synth->add_option("--out", sa.out, "output directory")->required();
  synth->add_option("--jpeg-quality", sa.jpeg_quality, "tampered-image JPEG quality")->check(CLI::Range(10, 100));
  synth->add_option("--blur", sa.blur, "tampered-image Gaussian sigma")->check(CLI::NonNegativeNumber);

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "train a model and keep the best validation checkpoint");
  trn->add_option("--config", ta.config, "key = value config file")->check(CLI::ExistingFile);
  trn->add_option("--manifest", ta.manifest, "dataset manifest")->required();
  trn->add_option("--out", ta.out, "checkpoint path")->required();
  trn->add_option("--log", ta.log, "per-epoch JSONL log");
  trn->add_option("--set", ta.settings, "override a config key (key=value)");
  trn->add_option("--seed", ta.seed, "training seed")->each([&](const std::string&) { ta.seed_set = true; });

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "predict masks for a manifest split");
  gen->add_option("--ckpt", ga.ckpt, "checkpoint")->required();
  gen->add_option("--manifest", ga.manifest, "dataset manifest")->required();
  gen->add_option("--out", ga.out, "output directory")->required();
  gen->add_option("--threshold", ga.threshold, "tampered-probability threshold");
  gen->add_option("--scale", ga.scale, "super-resolution scale")->check(CLI::Range(1.0, 4.0));
  gen->add_option("--split", ga.split, "train | val | test | all");
  gen->add_flag("--baseline", ga.baseline, "also write subtraction-baseline masks");

  FilterArgs fa;
  auto* flt = app.add_subcommand("filter", "apply the white-area validity filter");
  flt->add_option("--in", fa.in, "mask directory")->required();
  flt->add_option("--report", fa.report, "JSONL report path")->required();
  flt->add_option("--suffix", fa.suffix, "mask file suffix");

  EvalArgs ea;
  auto* evl = app.add_subcommand("eval", "score predicted masks against ground truth");
  evl->add_option("--manifest", ea.manifest, "dataset manifest")->required();
  evl->add_option("--pred", ea.pred, "prediction directory")->required();
  evl->add_option("--out", ea.out, "report JSON path")->required();
  evl->add_option("--split", ea.split, "train | val | test | all");
  evl->add_option("--suffix", ea.suffix, "prediction file suffix");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "write original | tampered | baseline | model panels");
  plot->add_option("--manifest", pl.manifest, "dataset manifest")->required();
  plot->add_option("--pred", pl.pred, "prediction directory")->required();
  plot->add_option("--out", pl.out, "output directory")->required();
  plot->add_option("--split", pl.split, "train | val | test | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*pair) return cmd_pair(pa);
    if (*synth) return cmd_synth(sa);
    if (*trn) return cmd_train(ta);
    if (*gen) return cmd_generate(ga);
    if (*flt) return cmd_filter(fa);
    if (*evl) return cmd_eval(ea);
    if (*plot) return cmd_plot(pl);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  return 2;
}
