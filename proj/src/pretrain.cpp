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

#include <algorithm>
#include <cmath>

#include "lacuna/parallel.hpp"
#include "lacuna/pretrain/trainer.hpp"

namespace lacuna {

namespace {

constexpr std::uint64_t kEpochStream = 0x70726570ULL;
constexpr std::uint64_t kInitStream = 0x696e6974ULL;

}  // namespace

Pretrainer::Pretrainer(ModelConfig model, PretrainSettings settings, std::vector<LineImage> lines)
    : model_(model), settings_(std::move(settings)), lines_(std::move(lines)) {
  if (lines_.empty()) throw ValidationError("pretraining needs at least one line");
  if (settings_.batch_size < 1) throw ValidationError("batch size must be >= 1");
  validate(settings_.schedule);
  const ShapePlan shape(model_);
  for (const auto& line : lines_) {
    if (line.height() != model_.image_height) {
      throw ValidationError("line '" + line.source_id + "' has height " + std::to_string(line.height()) + ", expected " +
                            std::to_string(model_.image_height));
    }
    if (shape.time_steps(line.width_px()) >= settings_.contrastive.mask.span_length) ++usable_;
  }
  if (usable_ == 0) {
    const int need = shape.min_width() + (settings_.contrastive.mask.span_length - 1) * shape.width_stride();
    throw ValidationError("all " + std::to_string(lines_.size()) +
                          " pretraining lines are too short for one mask span; lines need a width of at least " +
                          std::to_string(need) + " px at height " + std::to_string(model_.image_height));
  }
}

PretrainProgress Pretrainer::initial_progress() const {
  Rng rng(derive_seed(settings_.seed, kInitStream));
  PretrainProgress p;
  p.params = init_encoder(model_, rng).cast<float>();
  p.adam = AdamState<float>::like(p.params, settings_.adam);
  return p;
}

int Pretrainer::batches_per_epoch() const {
  return static_cast<int>((lines_.size() + settings_.batch_size - 1) / settings_.batch_size);
}

std::vector<std::size_t> Pretrainer::batch_indices(std::int64_t update) const {
  const std::int64_t per_epoch = batches_per_epoch();
  const std::int64_t epoch = update / per_epoch;
  const std::size_t b = static_cast<std::size_t>(update % per_epoch);
  Rng rng(derive_seed(settings_.seed, kEpochStream, static_cast<std::uint64_t>(epoch)));
  const std::vector<std::size_t> perm = permutation(lines_.size(), rng);
  const std::size_t begin = b * settings_.batch_size;
  const std::size_t end = std::min(perm.size(), begin + settings_.batch_size);
  return {perm.begin() + static_cast<std::ptrdiff_t>(begin), perm.begin() + static_cast<std::ptrdiff_t>(end)};
}

PretrainMetrics Pretrainer::step(PretrainProgress& progress) const {
  const std::int64_t update = progress.update;
  if (update >= settings_.schedule.total_updates) throw ValidationError("pretraining schedule already complete");
  const std::vector<std::size_t> batch = batch_indices(update);

  struct WorkerResult {
    ParameterSet<float> grads;
    ContrastiveBatchResult stats;
    int skipped = 0;
  };
  const int workers = std::max(1, std::min<int>(settings_.workers, static_cast<int>(batch.size())));
  std::vector<WorkerResult> results(static_cast<std::size_t>(workers));
  parallel_chunks(batch.size(), workers, [&](int w, std::size_t begin, std::size_t end) {
    WorkerResult& r = results[static_cast<std::size_t>(w)];
    r.grads = progress.params.zeros_like();
    for (std::size_t slot = begin; slot < end; ++slot) {
      const std::uint64_t seed = derive_seed(settings_.seed, static_cast<std::uint64_t>(update), slot);
      LineObjective line =
          contrastive_line(progress.params, lines_[batch[slot]].pixels, model_, settings_.contrastive, seed, &r.grads);
      if (line.skipped) {
        ++r.skipped;
        continue;
      }
      r.stats.merge(line.stats);
    }
  });

  ParameterSet<float> grads = std::move(results[0].grads);
  ContrastiveBatchResult stats = std::move(results[0].stats);
  int skipped = results[0].skipped;
  for (std::size_t w = 1; w < results.size(); ++w) {
    for (auto& e : grads.entries()) e.value += results[w].grads.at(e.name);
    stats.merge(results[w].stats);
    skipped += results[w].skipped;
  }

  PretrainMetrics m;
  m.lr = lr_at(settings_.schedule, update + 1);
  if (stats.n_masked > 0) {
    const float inv = 1.0f / static_cast<float>(stats.n_masked);
    for (auto& e : grads.entries()) e.value *= inv;
    if (settings_.clip_norm > 0.0) {
      const double norm = global_norm<float>(grads, nullptr);
      if (norm > settings_.clip_norm) {
        const float scale = static_cast<float>(settings_.clip_norm / norm);
        for (auto& e : grads.entries()) e.value *= scale;
      }
    }
    if (!std::isfinite(stats.loss)) throw NumericalError("non-finite contrastive loss at update " + std::to_string(update));
    adam_step(progress.params, grads, progress.adam, m.lr);
  }
  progress.update = update + 1;
  m.update = progress.update;
  m.loss = stats.loss;
  m.accuracy = stats.accuracy();
  m.n_masked = stats.n_masked;
  m.skipped_lines = skipped;
  return m;
}

void Pretrainer::run(PretrainProgress& progress, std::int64_t stop_at,
                     const std::function<void(const PretrainMetrics&, const PretrainProgress&)>& on_update) const {
  const std::int64_t end = std::min(stop_at, settings_.schedule.total_updates);
  while (progress.update < end) {
    const PretrainMetrics m = step(progress);
    if (on_update) on_update(m, progress);
  }
}

}  // namespace lacuna
