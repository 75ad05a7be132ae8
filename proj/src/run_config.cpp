// Copyright 2026 The Lacuna Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lacuna/cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lacuna/key_value.hpp"

namespace lacuna {

namespace {

std::string format(int v) { return std::to_string(v); }
std::string format(std::int64_t v) { return std::to_string(v); }
std::string format(std::uint64_t v) { return std::to_string(v); }
std::string format(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
std::string format(const std::array<int, 3>& v) {
  return std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]);
}

void assign(int& out, const std::string& key, const std::string& v) { out = parse_int(key, v); }
void assign(double& out, const std::string& key, const std::string& v) { out = parse_double(key, v); }
void assign(std::uint64_t& out, const std::string& key, const std::string& v) { out = parse_u64(key, v); }
void assign(std::int64_t& out, const std::string& key, const std::string& v) {
  const std::uint64_t u = parse_u64(key, v);
  if (u > static_cast<std::uint64_t>(INT64_MAX)) throw ValidationError("config key '" + key + "': value too large");
  out = static_cast<std::int64_t>(u);
}
void assign(std::array<int, 3>& out, const std::string& key, const std::string& v) {
  const std::vector<std::string> items = split_list(v);
  if (items.size() != 3) throw ValidationError("config key '" + key + "': expected three comma-separated integers");
  for (std::size_t i = 0; i < 3; ++i) out[i] = parse_int(key, items[i]);
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Field field(std::string key, Access access) {
  return {key, [key, access](RunConfig& c, const std::string& v) { assign(access(c), key, v); },
          [access](const RunConfig& c) { return format(access(c)); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      field("image_height", [](auto& c) -> auto& { return c.model.image_height; }),
      field("conv_channels", [](auto& c) -> auto& { return c.model.channels; }),
      field("lstm_layers", [](auto& c) -> auto& { return c.model.lstm_layers; }),
      field("lstm_hidden", [](auto& c) -> auto& { return c.model.lstm_hidden; }),
      field("score_dim", [](auto& c) -> auto& { return c.model.score_dim; }),
      field("leaky_slope", [](auto& c) -> auto& { return c.model.leaky_slope; }),
      field("norm_groups", [](auto& c) -> auto& { return c.model.norm_groups; }),
      field("norm_eps", [](auto& c) -> auto& { return c.model.norm_eps; }),
      field("mask_prob", [](auto& c) -> auto& { return c.mask.probability; }),
      field("mask_length", [](auto& c) -> auto& { return c.mask.span_length; }),
      field("mask_gap", [](auto& c) -> auto& { return c.mask.min_gap; }),
      field("n_foils", [](auto& c) -> auto& { return c.n_foils; }),
      field("temperature", [](auto& c) -> auto& { return c.temperature; }),
      field("pretrain_lr", [](auto& c) -> auto& { return c.pretrain_lr; }),
      field("pretrain_warmup", [](auto& c) -> auto& { return c.pretrain_warmup; }),
      field("pretrain_updates", [](auto& c) -> auto& { return c.pretrain_updates; }),
      field("pretrain_batch", [](auto& c) -> auto& { return c.pretrain_batch; }),
      field("finetune_lr", [](auto& c) -> auto& { return c.finetune_lr; }),
      field("finetune_warmup", [](auto& c) -> auto& { return c.finetune_warmup; }),
      field("finetune_hold", [](auto& c) -> auto& { return c.finetune_hold; }),
      field("finetune_decay", [](auto& c) -> auto& { return c.finetune_decay; }),
      field("finetune_final_factor", [](auto& c) -> auto& { return c.finetune_final_factor; }),
      field("freeze_epochs", [](auto& c) -> auto& { return c.freeze_epochs; }),
      field("finetune_epochs", [](auto& c) -> auto& { return c.finetune_epochs; }),
      field("finetune_batch", [](auto& c) -> auto& { return c.finetune_batch; }),
      field("probe_lines", [](auto& c) -> auto& { return c.probe_lines; }),
      field("adam_beta1", [](auto& c) -> auto& { return c.adam.beta1; }),
      field("adam_beta2", [](auto& c) -> auto& { return c.adam.beta2; }),
      field("adam_eps", [](auto& c) -> auto& { return c.adam.eps; }),
      field("clip_norm", [](auto& c) -> auto& { return c.clip_norm; }),
      field("ratio_lo", [](auto& c) -> auto& { return c.ratio_lo; }),
      field("ratio_hi", [](auto& c) -> auto& { return c.ratio_hi; }),
      field("seed", [](auto& c) -> auto& { return c.seed; }),
      field("workers", [](auto& c) -> auto& { return c.workers; }),
      field("checkpoint_every", [](auto& c) -> auto& { return c.checkpoint_every; }),
      field("stop_after_updates", [](auto& c) -> auto& { return c.stop_after_updates; }),
  };
  return table;
}

void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw ValidationError("config key '" + key + "' must be " + rule);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return names;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  const KeyValueFile kv = KeyValueFile::parse(text, origin);
  kv.reject_unknown(std::set<std::string>(keys().begin(), keys().end()));
  RunConfig c;
  for (const auto& f : fields()) {
    if (kv.has(f.key)) f.set(c, kv.get(f.key));
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void RunConfig::validate() const {
  require(model.image_height >= 48, "image_height", ">= 48");
  for (int ch : model.channels) require(ch >= 1, "conv_channels", "positive");
  require(model.lstm_layers >= 1, "lstm_layers", ">= 1");
  require(model.lstm_hidden >= 1, "lstm_hidden", ">= 1");
  require(model.score_dim >= 1, "score_dim", ">= 1");
  require(model.leaky_slope >= 0.0 && model.leaky_slope < 1.0, "leaky_slope", "in [0, 1)");
  require(model.norm_groups >= 1, "norm_groups", ">= 1");
  for (int ch : model.channels) require(ch % model.norm_groups == 0, "norm_groups", "a divisor of every conv channel count");
  require(model.norm_eps > 0.0, "norm_eps", "> 0");
  require(mask.probability > 0.0 && mask.probability <= 1.0, "mask_prob", "in (0, 1]");
  require(mask.span_length >= 1, "mask_length", ">= 1");
  require(mask.min_gap >= 0, "mask_gap", ">= 0");
  require(n_foils >= 1, "n_foils", ">= 1");
  require(temperature > 0.0, "temperature", "> 0");
  require(pretrain_lr > 0.0, "pretrain_lr", "> 0");
  require(pretrain_warmup >= 0.0 && pretrain_warmup <= 1.0, "pretrain_warmup", "in [0, 1]");
  require(pretrain_updates >= 1, "pretrain_updates", ">= 1");
  require(pretrain_batch >= 1, "pretrain_batch", ">= 1");
  require(finetune_lr > 0.0, "finetune_lr", "> 0");
  require(finetune_warmup >= 0.0 && finetune_warmup <= 1.0, "finetune_warmup", "in [0, 1]");
  require(finetune_hold >= 0.0 && finetune_hold <= 1.0, "finetune_hold", "in [0, 1]");
  require(finetune_decay >= 0.0 && finetune_decay <= 1.0, "finetune_decay", "in [0, 1]");
  require(std::abs(finetune_warmup + finetune_hold + finetune_decay - 1.0) < 1e-9, "finetune_decay",
          "such that finetune_warmup + finetune_hold + finetune_decay = 1");
  require(finetune_final_factor >= 0.0 && finetune_final_factor <= 1.0, "finetune_final_factor", "in [0, 1]");
  require(freeze_epochs >= 0, "freeze_epochs", ">= 0");
  require(finetune_epochs >= 1, "finetune_epochs", ">= 1");
  require(finetune_batch >= 1, "finetune_batch", ">= 1");
  require(probe_lines >= 0, "probe_lines", ">= 0");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "adam_beta1", "in [0, 1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "adam_beta2", "in [0, 1)");
  require(adam.eps > 0.0, "adam_eps", "> 0");
  require(clip_norm >= 0.0, "clip_norm", ">= 0 (0 disables clipping)");
  require(ratio_lo > 0.0, "ratio_lo", "> 0");
  require(ratio_hi >= ratio_lo, "ratio_hi", ">= ratio_lo");
  require(workers >= 1, "workers", ">= 1");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += f.key + "=" + f.get(*this) + "\n";
  return out;
}

PretrainSettings RunConfig::pretrain_settings() const {
  PretrainSettings s;
  s.contrastive.mask = mask;
  s.contrastive.n_foils = n_foils;
  s.contrastive.temperature = temperature;
  s.batch_size = pretrain_batch;
  s.schedule.peak_lr = pretrain_lr;
  s.schedule.warmup_fraction = pretrain_warmup;
  s.schedule.total_updates = pretrain_updates;
  s.adam = adam;
  s.clip_norm = clip_norm;
  s.seed = seed;
  s.workers = workers;
  return s;
}

FinetuneSettings RunConfig::finetune_settings() const {
  FinetuneSettings s;
  s.schedule.peak_lr = finetune_lr;
  s.schedule.warmup_fraction = finetune_warmup;
  s.schedule.hold_fraction = finetune_hold;
  s.schedule.decay_fraction = finetune_decay;
  s.schedule.final_factor = finetune_final_factor;
  s.epochs = finetune_epochs;
  s.freeze_epochs = freeze_epochs;
  s.batch_size = finetune_batch;
  s.adam = adam;
  s.clip_norm = clip_norm;
  s.seed = seed;
  s.workers = workers;
  s.probe_lines = probe_lines;
  return s;
}

}  // namespace lacuna
