// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "maskforge/ingestion.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace maskforge;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Run cli(const fs::path& work, const std::string& args) {
  const fs::path out = work / "stdout.txt", err = work / "stderr.txt";
  const std::string cmd =
      std::string(MASKFORGE_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2") {
  const fs::path w = testing::scratch_dir("cli_usage");
  CHECK(cli(w, "").code == 2);
  CHECK(cli(w, "frobnicate").code == 2);
  CHECK(cli(w, "synth --out x --bogus 1").code == 2);
  CHECK(cli(w, "generate --manifest m.jsonl --out o").code == 2);  // missing --ckpt
  CHECK(cli(w, "synth --out x --jpeg-quality 0").code == 2);
  CHECK(cli(w, "--help").code == 0);
}

TEST_CASE("runtime errors exit 1 with one error line") {
  const fs::path w = testing::scratch_dir("cli_runtime");
  const Run r = cli(w, "eval --manifest " + (w / "missing.jsonl").string() + " --pred " + w.string() + " --out " +
                           (w / "r.json").string());
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: ", 0) == 0);
  CHECK(r.err.find('\n') == r.err.size() - 1);
  CHECK(cli(w, "train --manifest m.jsonl --out c.bin --set no_such_key=1").code != 0);
}

TEST_CASE("synth is byte-identical across runs") {
  const fs::path w = testing::scratch_dir("cli_synth");
  REQUIRE(cli(w, "synth --n 8 --size 64 --seed 0 --out " + (w / "a").string()).code == 0);
  REQUIRE(cli(w, "synth --n 8 --size 64 --seed 0 --out " + (w / "b").string()).code == 0);
  const auto a = tree(w / "a"), b = tree(w / "b");
  CHECK(a.size() == 8 * 3 + 1);
  CHECK(a == b);
  REQUIRE(cli(w, "synth --n 8 --size 64 --seed 1 --out " + (w / "c").string()).code == 0);
  CHECK(tree(w / "c") != a);
}

TEST_CASE("pipeline on a small synthetic set") {
  const fs::path w = testing::scratch_dir("cli_pipeline");
  const std::string data = (w / "data").string(), manifest = (w / "manifest.jsonl").string();
  REQUIRE(cli(w, "synth --n 8 --size 32 --seed 3 --jpeg-quality 50 --out " + data).code == 0);
  REQUIRE(cli(w, "pair --root " + data + " --out " + manifest + " --seed 1").code == 0);
  const DatasetManifest m = read_manifest(manifest);
  CHECK(m.records.size() == 8);
  CHECK(m.split(Split::test).size() == 2);
  CHECK(m.split(Split::val).size() == 1);

  {
    std::ofstream cfg(w / "run.cfg");
    cfg << "# tiny run\nchannels = 4\ndecoder_hidden = 8\nmax_epochs = 5\nlr_decay_iters = 5\n";
  }
  const std::string ckpt = (w / "ckpt.bin").string(), log = (w / "log.jsonl").string();
  const Run t = cli(w, "train --config " + (w / "run.cfg").string() + " --manifest " + manifest + " --out " + ckpt +
                           " --log " + log + " --set max_epochs=2 --seed 7");
  REQUIRE_MESSAGE(t.code == 0, t.err);
  std::ifstream ls(log);
  int rows = 0;
  for (std::string line; std::getline(ls, line); ++rows) {
    const auto j = nlohmann::json::parse(line);
    for (const char* k : {"epoch", "ce", "mmd", "val_f1", "lr"}) CHECK(j.contains(k));
  }
  CHECK(rows == 2);  // --set overrides the file

  const std::string pred = (w / "pred").string();
  REQUIRE(cli(w, "generate --ckpt " + ckpt + " --manifest " + manifest + " --out " + pred + " --baseline").code == 0);
  for (const auto& r : m.split(Split::test)) {
    CHECK(fs::exists(fs::path(pred) / (r.pair_id + "_mask.png")));
    CHECK(fs::exists(fs::path(pred) / (r.pair_id + "_baseline.png")));
  }
  const auto first = tree(pred);
  REQUIRE(cli(w, "generate --ckpt " + ckpt + " --manifest " + manifest + " --out " + pred + " --baseline").code == 0);
  CHECK(tree(pred) == first);

  const std::string scaled = (w / "scaled").string();
  REQUIRE(cli(w, "generate --ckpt " + ckpt + " --manifest " + manifest + " --out " + scaled + " --scale 2").code == 0);
  const ManifestRecord r0 = m.split(Split::test).front();
  const Mask sm = read_mask(fs::path(scaled) / (r0.pair_id + "_mask.png"));
  CHECK(sm.width == r0.width);
  CHECK(sm.height == r0.height);

  const std::string report = (w / "filter.jsonl").string();
  REQUIRE(cli(w, "filter --in " + pred + " --report " + report).code == 0);
  std::ifstream fr(report);
  int frows = 0;
  for (std::string line; std::getline(fr, line); ++frows) {
    const auto j = nlohmann::json::parse(line);
    CHECK((j["verdict"] == "valid" || j["verdict"] == "invalid"));
    CHECK(j["fraction"].get<double>() >= 0.0);
  }
  CHECK(frows == 2);

  const std::string eval_out = (w / "eval.json").string();
  REQUIRE(cli(w, "eval --manifest " + manifest + " --pred " + pred + " --out " + eval_out).code == 0);
  const auto ej = nlohmann::json::parse(slurp(eval_out));
  CHECK(ej.contains("micro"));

  const std::string panels = (w / "panels").string();
  REQUIRE(cli(w, "plot --manifest " + manifest + " --pred " + pred + " --out " + panels).code == 0);
  const Image8 panel = read_image_rgb(fs::path(panels) / (r0.pair_id + "_panel.png"));
  CHECK(panel.height == r0.height);
  CHECK(panel.width == 4 * r0.width + 3 * 4);

  CHECK(tree(w / "data").size() == 8 * 3 + 1);  // inputs untouched
}

}  // TEST_SUITE
