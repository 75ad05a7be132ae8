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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lacuna/encoder/encoder.hpp"
#include "lacuna/finetune/trainer.hpp"
#include "lacuna/pretrain/trainer.hpp"

namespace lacuna {

/// Every tunable of a run, read from a flat key=value file. Keys that are
/// absent keep their defaults; `to_text` lists the effective values of all
/// keys in a fixed order.
struct RunConfig {
  ModelConfig model;

  MaskSettings mask;
  int n_foils = 100;
  double temperature = 1.0;

  double pretrain_lr = 5e-4;
  double pretrain_warmup = 0.08;
  std::int64_t pretrain_updates = 20000;
  int pretrain_batch = 8;

  double finetune_lr = 5e-4;
  double finetune_warmup = 0.10;
  double finetune_hold = 0.40;
  double finetune_decay = 0.50;
  double finetune_final_factor = 0.05;
  int freeze_epochs = 200;
  int finetune_epochs = 700;
  int finetune_batch = 8;
  int probe_lines = 8;

  AdamSettings adam;
  double clip_norm = 0.0;

  double ratio_lo = 6.0;
  double ratio_hi = 23.0;

  std::uint64_t seed = 1;
  int workers = 1;
  std::int64_t checkpoint_every = 1000;  // 0: only at the end and stage boundaries
  std::int64_t stop_after_updates = 0;   // 0: run the whole schedule

  static RunConfig parse(const std::string& text, const std::string& origin = "<string>");
  static RunConfig load(const std::filesystem::path& path);
  static const std::vector<std::string>& keys();

  /// Throws ValidationError naming the first out-of-range value.
  void validate() const;
  std::string to_text() const;

  PretrainSettings pretrain_settings() const;
  FinetuneSettings finetune_settings() const;
};

}  // namespace lacuna
