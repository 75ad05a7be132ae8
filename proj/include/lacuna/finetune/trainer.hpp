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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lacuna/corpus/line_image.hpp"
#include "lacuna/corpus/vocabulary.hpp"
#include "lacuna/encoder/encoder.hpp"
#include "lacuna/finetune/ctc.hpp"
#include "lacuna/optim/adam.hpp"
#include "lacuna/optim/schedule.hpp"

namespace lacuna {

/// Input of one line at whichever depth is available: cached context skips
/// the whole encoder, cached features skip the extractor.
template <typename Scalar>
struct LineInput {
  const Bitmap* pixels = nullptr;
  const Tensor<Scalar>* features = nullptr;
  const Tensor<Scalar>* context = nullptr;
};

template <typename Scalar>
struct CtcLineResult {
  double loss = 0.0;
  bool feasible = true;
  Tensor<Scalar> logits;
};

/// CTC loss of one line. Parameters present in `grads` are trainable and
/// receive grad_scale * d loss / d param.
template <typename Scalar>
CtcLineResult<Scalar> ctc_line(const ParameterSet<Scalar>& params, const ModelConfig& cfg, const LineInput<Scalar>& in,
                               std::span<const int> label, ParameterSet<Scalar>* grads = nullptr,
                               Scalar grad_scale = Scalar(1)) {
  ad::Tape<Scalar> tape;
  const auto trainable = [grads](const std::string& name) { return grads != nullptr && grads->contains(name); };
  BoundParameters<Scalar> p(tape, params, trainable);
  ad::Var context;
  if (in.context) {
    context = tape.input(*in.context);
  } else {
    ad::Var features = in.features ? tape.input(*in.features) : conv_forward(tape, p, image_input(tape, *in.pixels), cfg);
    context = context_forward(tape, p, features, cfg);
  }
  ad::Var logits = vocab_logits(tape, p, context);
  bool feasible = true;
  ad::Var loss = ctc_loss(tape, logits, label, Vocabulary::kBlank, feasible);
  CtcLineResult<Scalar> out;
  out.loss = static_cast<double>(tape.value(loss)(0, 0));
  out.feasible = feasible;
  out.logits = tape.value(logits);
  if (grads && feasible) {
    tape.backward(loss, grad_scale);
    p.accumulate_grads(tape, *grads);
  }
  return out;
}

enum class InitKind { kScratch, kPretrained };

std::string to_string(InitKind kind);

struct FinetuneSettings {
  TriStageSchedule schedule;  // total_updates is derived from epochs and data size
  int epochs = 700;
  int freeze_epochs = 200;
  int batch_size = 8;
  AdamSettings adam;
  double clip_norm = 0.0;
  std::uint64_t seed = 1;
  int workers = 1;
  int probe_lines = 8;  // first lines of the set, decoded after each epoch
};

struct FinetuneProgress {
  ParameterSet<float> params;
  AdamState<float> adam;
  std::int64_t update = 0;
  int epoch = 0;  // completed epochs
};

struct FinetuneMetrics {
  int epoch = 0;  // 0-based index of the epoch just run
  double lr = 0.0;  // at the epoch's last update
  double loss = 0.0;  // mean CTC loss over feasible lines
  double probe_cer = 0.0;
  int skipped_lines = 0;
};

/// CTC fine-tuning with a freeze regime.
///
/// The vocabulary projection always trains. From a pretrained encoder the
/// extractor stays frozen and the BiLSTM joins at epoch `freeze_epochs`;
/// from scratch everything trains from the first epoch. Frozen prefixes of the
/// network are evaluated once per line and cached.
class Finetuner {
 public:
  Finetuner(ModelConfig model, FinetuneSettings settings, InitKind init, Vocabulary vocab,
            std::vector<TranscribedLine> lines);

  /// Encoder from `pretrained` (scoring heads dropped) or a seeded random
  /// initialization when null, plus a fresh vocabulary projection.
  FinetuneProgress initial_progress(const ParameterSet<float>* pretrained) const;

  bool trainable(const std::string& name, int epoch) const;

  /// One pass over all lines in a seed-derived order.
  FinetuneMetrics run_epoch(FinetuneProgress& progress);

  /// Runs the remaining epochs; `on_epoch` sees each epoch's metrics.
  void run(FinetuneProgress& progress,
           const std::function<void(const FinetuneMetrics&, const FinetuneProgress&)>& on_epoch);

  std::int64_t total_updates() const { return settings_.schedule.total_updates; }
  int batches_per_epoch() const;
  const Vocabulary& vocab() const { return vocab_; }
  /// Source ids of lines whose label cannot fit in their frame count.
  const std::vector<std::string>& infeasible_lines() const { return infeasible_; }

 private:
  LineInput<float> input_for(std::size_t line, const FinetuneProgress& progress, int epoch);

  ModelConfig model_;
  FinetuneSettings settings_;
  InitKind init_;
  Vocabulary vocab_;
  std::vector<TranscribedLine> lines_;
  std::vector<std::vector<int>> labels_;
  std::vector<bool> feasible_;
  std::vector<std::string> infeasible_;
  std::vector<Tensorf> feature_cache_;
  std::vector<Tensorf> context_cache_;
};

}  // namespace lacuna
