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
#include <vector>

#include "lacuna/corpus/line_image.hpp"
#include "lacuna/encoder/encoder.hpp"
#include "lacuna/masking/mask_plan.hpp"
#include "lacuna/optim/adam.hpp"
#include "lacuna/optim/schedule.hpp"
#include "lacuna/pretrain/contrastive.hpp"

namespace lacuna {

struct ContrastiveSettings {
  MaskSettings mask;
  int n_foils = 100;
  double temperature = 1.0;
};

/// Outcome of the contrastive objective on one line.
struct LineObjective {
  ContrastiveBatchResult stats;
  bool skipped = false;  // no span fits (T < span length)
};

/// Contrastive objective of one line: extract features, mask, contextualize,
/// score each masked step against same-line foils. All randomness (plan and
/// foils) comes from `line_seed`. With `grads`, the gradient of the line's
/// loss SUM, times `grad_scale`, is added into it.
template <typename Scalar>
LineObjective contrastive_line(const ParameterSet<Scalar>& params, const Bitmap& pixels, const ModelConfig& cfg,
                               const ContrastiveSettings& settings, std::uint64_t line_seed,
                               ParameterSet<Scalar>* grads = nullptr, Scalar grad_scale = Scalar(1)) {
  LineObjective out;
  ad::Tape<Scalar> tape;
  const auto trainable = [grads](const std::string& name) { return grads != nullptr && grads->contains(name); };
  BoundParameters<Scalar> p(tape, params, trainable);
  ad::Var targets = conv_forward(tape, p, image_input(tape, pixels), cfg);
  const int steps = static_cast<int>(tape.value(targets).rows());
  Rng rng(line_seed);
  const MaskPlan plan = sample_plan(steps, settings.mask, rng);
  if (plan.empty()) {
    out.skipped = true;
    return out;
  }
  const std::vector<int> masked = plan.masked_steps();
  const FoilPlan foils = sample_foils(steps, masked, settings.n_foils, rng);
  ad::Var masked_features = apply_mask(tape, targets, plan, p[param_names::kMaskEmbedding]);
  ad::Var context = context_forward(tape, p, masked_features, cfg);
  ad::Var loss = contrastive_loss(tape, context, targets, p[param_names::kScoreContext], p[param_names::kScoreFeature],
                                  foils, settings.temperature, out.stats);
  if (grads) {
    tape.backward(loss, grad_scale);
    p.accumulate_grads(tape, *grads);
  }
  return out;
}

/// Mean contrastive loss over every masked position of a batch of lines and,
/// with `grads` (zeroed by the caller), its gradient. `seeds[i]` drives line i.
template <typename Scalar>
ContrastiveBatchResult contrastive_batch(const ParameterSet<Scalar>& params, const std::vector<const Bitmap*>& lines,
                                         const std::vector<std::uint64_t>& seeds, const ModelConfig& cfg,
                                         const ContrastiveSettings& settings, ParameterSet<Scalar>* grads,
                                         int* skipped = nullptr) {
  ContrastiveBatchResult total;
  int skip = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    LineObjective line = contrastive_line(params, *lines[i], cfg, settings, seeds[i], grads);
    if (line.skipped) {
      ++skip;
      continue;
    }
    total.merge(line.stats);
  }
  if (grads && total.n_masked > 0) {
    const Scalar inv = Scalar(1) / static_cast<Scalar>(total.n_masked);
    for (auto& e : grads->entries()) e.value *= inv;
  }
  if (skipped) *skipped = skip;
  return total;
}

struct PretrainSettings {
  ContrastiveSettings contrastive;
  int batch_size = 8;
  PretrainSchedule schedule;
  AdamSettings adam;
  double clip_norm = 0.0;  // 0 disables global-norm clipping
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Everything needed to continue a pre-training run.
struct PretrainProgress {
  ParameterSet<float> params;
  AdamState<float> adam;
  std::int64_t update = 0;
};

struct PretrainMetrics {
  std::int64_t update = 0;  // 1-based count of updates done
  double lr = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
  int n_masked = 0;
  int skipped_lines = 0;
};

/// Mini-batch pre-training loop over a fixed set of lines.
///
/// Batch b of epoch e takes lines perm_e[b*B, (b+1)*B) where perm_e is a
/// seed-derived permutation; every line's mask and foils derive from
/// (seed, update, slot), so a run resumed at any update replays exactly.
class Pretrainer {
 public:
  Pretrainer(ModelConfig model, PretrainSettings settings, std::vector<LineImage> lines);

  /// Fresh progress: seeded initialization and zero optimizer state.
  PretrainProgress initial_progress() const;

  /// Runs one update on `progress`.
  PretrainMetrics step(PretrainProgress& progress) const;

  /// Runs until `progress.update` reaches `stop_at` (or the schedule end).
  /// `on_update` sees every update's metrics and may write checkpoints.
  void run(PretrainProgress& progress, std::int64_t stop_at,
           const std::function<void(const PretrainMetrics&, const PretrainProgress&)>& on_update) const;

  int batches_per_epoch() const;
  const std::vector<LineImage>& lines() const { return lines_; }
  int usable_lines() const { return usable_; }

 private:
  std::vector<std::size_t> batch_indices(std::int64_t update) const;

  ModelConfig model_;
  PretrainSettings settings_;
  std::vector<LineImage> lines_;
  int usable_ = 0;
};

}  // namespace lacuna
