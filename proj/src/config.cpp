// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maskforge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "learning_rate") c.train.learning_rate = parse_number<double>(key, value);
  else if (key == "max_epochs") c.train.max_epochs = parse_number<int>(key, value);
  else if (key == "lr_decay_iters") c.train.lr_decay_iters = parse_number<int>(key, value);
  else if (key == "batch_size") c.train.batch_size = parse_number<int>(key, value);
  else if (key == "lambda_mmd") c.train.lambda_mmd = parse_number<double>(key, value);
  else if (key == "seed") c.train.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "r_min") c.train.r_min = parse_number<double>(key, value);
  else if (key == "r_max") c.train.r_max = parse_number<double>(key, value);
  else if (key == "momentum") c.train.momentum = parse_number<double>(key, value);
  else if (key == "max_steps") c.train.max_steps = parse_number<int>(key, value);
  else if (key == "val_threshold") c.train.val_threshold = parse_number<double>(key, value);
  else if (key == "optimizer") c.train.optimizer = parse_optimizer(value);
  else if (key == "grad_clip") c.train.grad_clip = parse_number<double>(key, value);
  else if (key == "channels") c.model.channels = parse_number<int>(key, value);
  else if (key == "decoder_hidden") c.model.decoder_hidden = parse_number<int>(key, value);
  else if (key == "grid_h") c.model.grid.gh = parse_number<int>(key, value);
  else if (key == "grid_w") c.model.grid.gw = parse_number<int>(key, value);
  else if (key == "tie_encoders") c.model.tie_encoders = parse_bool(key, value);
  else if (key == "mmd_kernel") c.model.mmd_kernel = parse_mmd_kernel(value);
  else if (key == "residual_offset") c.model.residual_offset = parse_number<double>(key, value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  c.train.validate();
  c.model.grid.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace maskforge
