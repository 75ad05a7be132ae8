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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lacuna/cli/checkpoint.hpp"
#include "lacuna/cli/run_config.hpp"
#include "lacuna/corpus/manifest.hpp"
#include "lacuna/decode_eval/evaluate.hpp"

namespace lacuna {

/// Options shared by the training commands. Flags override config values.
struct RunOptions {
  std::filesystem::path config;  // empty: all defaults
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

/// File names written into a command's output directory.
namespace outputs {
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kLatest = "checkpoint.bin";
inline constexpr const char* kPretrained = "pretrained.bin";
inline constexpr const char* kFreezeEnd = "freeze_end.bin";
inline constexpr const char* kFinetuned = "finetuned.bin";
inline constexpr const char* kPretrainMetrics = "pretrain_metrics.tsv";
inline constexpr const char* kFinetuneMetrics = "finetune_metrics.tsv";
inline constexpr const char* kCerReport = "cer_report.tsv";
}  // namespace outputs

/// Loads the config, applies flag overrides and echoes the effective values to `log`.
RunConfig resolve_config(const RunOptions& options, std::ostream& log);

/// Contrastive pre-training on the manifest's pretrain lines. With `resume`,
/// continues the run stored in that checkpoint. Stops early (with a
/// resumable checkpoint) when stop_after_updates is set.
void cmd_pretrain(const RunOptions& options, const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                  const std::filesystem::path& resume, std::ostream& log);

/// CTC fine-tuning on the manifest's finetune lines. `init` is a checkpoint
/// path or "scratch".
void cmd_finetune(const RunOptions& options, const std::filesystem::path& manifest, const std::string& init,
                  const std::filesystem::path& out_dir, std::ostream& log);

/// Transcribes line images (image files or manifests, in order), one UTF-8
/// line of output per image.
std::vector<std::string> cmd_transcribe(const std::filesystem::path& checkpoint,
                                        const std::vector<std::filesystem::path>& inputs);

/// Scores the manifest's test lines; writes the report when `report_path` is set.
CerReport cmd_evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
                       const std::filesystem::path& report_path, std::ostream& log);

/// Generates the synthetic corpus described by `synth_config` (defaults if empty).
Manifest cmd_synth(const std::filesystem::path& synth_config, const std::filesystem::path& out_dir,
                   std::optional<std::uint64_t> seed, std::ostream& log);

/// Reads a fine-tuned checkpoint's model configuration and vocabulary.
struct LoadedModel {
  Checkpoint checkpoint;
  RunConfig config;
  Vocabulary vocab;
};
LoadedModel load_model(const std::filesystem::path& checkpoint);

/// 0 ok, 1 validation, 2 I/O, 3 numerical failure.
int exit_code(const std::exception& error);

}  // namespace lacuna
