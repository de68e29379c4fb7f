// Copyright 2026 The maskforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskforge/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "maskforge/kernels.hpp"

namespace maskforge {

using json = nlohmann::json;

const char* optimizer_name(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(const std::string& s) {
  if (s == "sgd") return Optimizer::sgd;
  if (s == "adam") return Optimizer::adam;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (lr_decay_iters < 1) throw std::invalid_argument("lr_decay_iters must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lambda_mmd >= 0)) throw std::invalid_argument("lambda_mmd must be >= 0");
  if (!(r_min >= 1.0 && r_max >= r_min && r_max <= 4.0)) throw std::invalid_argument("need 1 <= r_min <= r_max <= 4");
  if (!(momentum >= 0 && momentum < 1)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (!(grad_clip >= 0)) throw std::invalid_argument("grad_clip must be >= 0");
}

double cross_entropy(const ProbMap& prob, const Mask& target) {
  if (prob.height != target.height || prob.width != target.width)
    throw std::invalid_argument("cross_entropy: size mismatch");
  const std::size_t n = prob.pixels();
  if (n == 0) throw std::invalid_argument("cross_entropy: empty map");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = target.data[i] ? 1 : 0;
    sum -= std::log(std::max(prob.p[2 * i + cls], 1e-12));
  }
  return sum / static_cast<double>(n);
}

double total_loss(const ProbMap& prob, const Mask& target, const FeatureEmbedding& z1, const FeatureEmbedding& z2,
                  double lambda_mmd, MmdKernel kernel) {
  const double ce = cross_entropy(prob, target);
  if (lambda_mmd == 0.0) return ce;
  return ce + lambda_mmd * mmd(z1, z2, kernel);
}

std::vector<Sample> load_samples(const std::vector<ManifestRecord>& records) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({load_pair(r), load_mask(r)});
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

Checkpoint capture(MaskModel& model, const TrainConfig& train, int epoch, double best_val_f1) {
  Checkpoint c;
  c.model = model.config();
  c.train = train;
  c.epoch = epoch;
  c.best_val_f1 = best_val_f1;
  for (const auto& np : model.parameters()) c.tensors.push_back({np.name, np.param->shape, np.param->value});
  return c;
}

MaskModel restore(const Checkpoint& ckpt) {
  MaskModel model(ckpt.model);
  auto params = model.parameters();
  if (params.size() != ckpt.tensors.size())
    throw std::runtime_error("checkpoint has " + std::to_string(ckpt.tensors.size()) + " tensors, model expects " +
                             std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = ckpt.tensors[i];
    if (t.name != params[i].name || t.shape != params[i].param->shape)
      throw std::runtime_error("checkpoint tensor " + t.name + " does not match model parameter " + params[i].name);
    params[i].param->value = t.values;
  }
  return model;
}

namespace {

constexpr char kMagic[8] = {'M', 'F', 'C', 'K', 'P', 'T', '1', '\n'};

json model_json(const ModelConfig& m) {
  return {{"channels", m.channels},   {"decoder_hidden", m.decoder_hidden},
          {"grid_h", m.grid.gh},      {"grid_w", m.grid.gw},
          {"tie_encoders", m.tie_encoders}, {"mmd_kernel", mmd_kernel_name(m.mmd_kernel)},
          {"init_seed", m.init_seed}, {"residual_offset", m.residual_offset}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.channels = j.at("channels").get<int>();
  m.decoder_hidden = j.at("decoder_hidden").get<int>();
  m.grid = {j.at("grid_h").get<int>(), j.at("grid_w").get<int>()};
  m.tie_encoders = j.at("tie_encoders").get<bool>();
  m.mmd_kernel = parse_mmd_kernel(j.at("mmd_kernel").get<std::string>());
  m.init_seed = j.at("init_seed").get<std::uint64_t>();
  m.residual_offset = j.at("residual_offset").get<double>();
  return m;
}

json train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"max_epochs", t.max_epochs}, {"lr_decay_iters", t.lr_decay_iters},
          {"batch_size", t.batch_size},       {"lambda_mmd", t.lambda_mmd}, {"seed", t.seed},
          {"r_min", t.r_min},                 {"r_max", t.r_max},           {"momentum", t.momentum}, {"optimizer", optimizer_name(t.optimizer)},
          {"max_steps", t.max_steps},         {"val_threshold", t.val_threshold}, {"grad_clip", t.grad_clip}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.learning_rate = j.at("learning_rate").get<double>();
  t.max_epochs = j.at("max_epochs").get<int>();
  t.lr_decay_iters = j.at("lr_decay_iters").get<int>();
  t.batch_size = j.at("batch_size").get<int>();
  t.lambda_mmd = j.at("lambda_mmd").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.r_min = j.at("r_min").get<double>();
  t.r_max = j.at("r_max").get<double>();
  t.momentum = j.at("momentum").get<double>();
  t.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  t.max_steps = j.at("max_steps").get<int>();
  t.val_threshold = j.at("val_threshold").get<double>();
  t.grad_clip = j.at("grad_clip").get<double>();
  return t;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json header;
  header["version"] = kCheckpointVersion;
  header["C"] = ckpt.model.channels;
  header["stride"] = Encoder::kStride;
  header["kernel"] = mmd_kernel_name(ckpt.model.mmd_kernel);
  header["lambda_mmd"] = ckpt.train.lambda_mmd;
  header["model"] = model_json(ckpt.model);
  header["train"] = train_json(ckpt.train);
  header["epoch"] = ckpt.epoch;
  header["best_val_f1"] = ckpt.best_val_f1;
  header["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    header["tensors"].push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"count", t.values.size()}});
    offset += t.values.size();
  }
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  // little-endian float64, the host layout on supported targets
  for (const auto& t : ckpt.tensors)
    os.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * 8));
  if (!os) throw std::runtime_error("short write to checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read checkpoint " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error(path.string() + " is not a maskforge checkpoint");
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!is || len > (1u << 26)) throw std::runtime_error("corrupt checkpoint header in " + path.string());
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  const json header = json::parse(text);
  if (header.at("version").get<int>() != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + header.at("version").dump());

  Checkpoint c;
  c.model = model_from_json(header.at("model"));
  c.train = train_from_json(header.at("train"));
  c.epoch = header.at("epoch").get<int>();
  c.best_val_f1 = header.at("best_val_f1").get<double>();
  for (const auto& jt : header.at("tensors")) {
    Checkpoint::Tensor t;
    t.name = jt.at("name").get<std::string>();
    t.shape = jt.at("shape").get<std::vector<int>>();
    t.values.resize(jt.at("count").get<std::size_t>());
    is.read(reinterpret_cast<char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * 8));
    if (!is) throw std::runtime_error("truncated checkpoint " + path.string());
    c.tensors.push_back(std::move(t));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Training loop

MetricsReport validate(const MaskModel& model, const std::vector<Sample>& samples, double tau) {
  if (samples.empty()) throw std::invalid_argument("validate: empty split");
  ConfusionCounts pooled;
  for (const auto& s : samples) pooled += confusion(model.predict_mask(s.pair, tau), s.mask);
  return metrics(pooled);
}

MetricsReport validate(const Checkpoint& ckpt, const std::vector<ManifestRecord>& records, double tau) {
  for (const auto& r : records)
    if (!r.mask_path) throw std::runtime_error("validate: record " + r.pair_id + " has no ground-truth mask");
  return validate(restore(ckpt), load_samples(records), tau);
}

namespace {

struct PreparedSample {
  Tensor original;
  Tensor tampered;
  const Mask* mask;
};

}  // namespace

TrainResult train(const TrainConfig& config, const ModelConfig& model_config, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty train split");
  if (val_set.empty()) throw std::invalid_argument("train: empty val split");

  ModelConfig mc = model_config;
  mc.init_seed = config.seed;
  MaskModel model(mc);
  auto params = model.parameters();
  std::vector<std::vector<double>> velocity, second;
  for (const auto& p : params) {
    velocity.emplace_back(p.param->size(), 0.0);
    if (config.optimizer == Optimizer::adam) second.emplace_back(p.param->size(), 0.0);
  }
  constexpr double kBeta2 = 0.999, kAdamEps = 1e-8;

  std::vector<PreparedSample> data;
  for (const auto& s : train_set) {
    if (s.mask.height != s.pair.original.height || s.mask.width != s.pair.original.width)
      throw std::invalid_argument("train: mask size differs from pair " + s.pair.pair_id);
    data.push_back({to_unit_tensor(s.pair.original), to_unit_tensor(s.pair.tampered), &s.mask});
  }

  std::mt19937_64 rng(config.seed ^ 0x5DEECE66DULL);
  std::uniform_real_distribution<double> scale_dist(config.r_min, config.r_max);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  double best_f1 = -1.0;
  bool stop = false;
  for (int epoch = 0; epoch < config.max_epochs && !stop; ++epoch) {
    const double lr =
        config.learning_rate * std::max(0.0, 1.0 - static_cast<double>(epoch) / config.lr_decay_iters);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double r = config.r_min == config.r_max ? config.r_min : scale_dist(rng);
      const double grad_scale = 1.0 / static_cast<double>(end - start);
      model.zero_grad();
      double ce = 0.0, mm = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const PreparedSample& s = data[order[b]];
        MaskModel::Trace trace;
        model.forward(s.original, s.tampered, r, r, &trace);
        const LossParts parts = model.backward(trace, target_for_trace(*s.mask, trace), config.lambda_mmd, grad_scale);
        if (!std::isfinite(parts.total)) {
          std::ostringstream msg;
          msg << "non-finite loss at epoch " << epoch << ", batch " << start / config.batch_size << " (ce=" << parts.ce
              << ", mmd=" << parts.mmd << ", pair " << train_set[order[b]].pair.pair_id << ")";
          throw TrainingDiverged(msg.str());
        }
        ce += parts.ce * grad_scale;
        mm += parts.mmd * grad_scale;
      }
      double clip = 1.0;
      if (config.grad_clip > 0) {
        double sq = 0.0;
        for (const auto& np : params) sq += kernels::dot(np.param->grad.data(), np.param->grad.data(), np.param->size());
        const double norm = std::sqrt(sq);
        if (norm > config.grad_clip) clip = config.grad_clip / norm;
      }
      const int t = result.steps + 1;
      const double bc1 = 1.0 - std::pow(config.momentum, t), bc2 = 1.0 - std::pow(kBeta2, t);
      for (std::size_t i = 0; i < params.size(); ++i) {
        nn::Param& p = *params[i].param;
        std::vector<double>& v = velocity[i];
        if (config.optimizer == Optimizer::sgd) {
          for (std::size_t k = 0; k < p.size(); ++k) {
            v[k] = config.momentum * v[k] + clip * p.grad[k];
            p.value[k] -= lr * v[k];
          }
        } else {
          std::vector<double>& m2 = second[i];
          for (std::size_t k = 0; k < p.size(); ++k) {
            const double g = clip * p.grad[k];
            v[k] = config.momentum * v[k] + (1.0 - config.momentum) * g;
            m2[k] = kBeta2 * m2[k] + (1.0 - kBeta2) * g * g;
            p.value[k] -= lr * (v[k] / bc1) / (std::sqrt(m2[k] / bc2) + kAdamEps);
          }
        }
      }
      log.ce += ce;
      log.mmd += mm;
      ++log.steps;
      ++result.steps;
      if (config.max_steps > 0 && result.steps >= config.max_steps) {
        stop = true;
        break;
      }
    }
    log.ce /= log.steps;
    log.mmd /= log.steps;
    log.val_f1 = validate(model, val_set, config.val_threshold).f1;
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);
    if (log.val_f1 > best_f1) {
      best_f1 = log.val_f1;
      result.best = capture(model, config, epoch, best_f1);
    }
  }
  return result;
}

TrainResult train(const TrainConfig& config, const ModelConfig& model_config, const DatasetManifest& manifest,
                  const EpochCallback& on_epoch) {
  manifest.validate();
  const auto train_records = manifest.split(Split::train);
  const auto val_records = manifest.split(Split::val);
  if (train_records.empty()) throw std::invalid_argument("manifest has no train split");
  if (val_records.empty()) throw std::invalid_argument("manifest has no val split");
  return train(config, model_config, load_samples(train_records), load_samples(val_records), on_epoch);
}

}  // namespace maskforge
