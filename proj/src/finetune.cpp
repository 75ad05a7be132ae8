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

#include "lacuna/decode_eval/cer.hpp"
#include "lacuna/decode_eval/decode.hpp"
#include "lacuna/finetune/trainer.hpp"
#include "lacuna/parallel.hpp"

namespace lacuna {

namespace {

constexpr std::uint64_t kEpochStream = 0x66696e65ULL;
constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kHeadStream = 0x68656164ULL;

}  // namespace

std::string to_string(InitKind kind) { return kind == InitKind::kPretrained ? "pretrained" : "scratch"; }

Finetuner::Finetuner(ModelConfig model, FinetuneSettings settings, InitKind init, Vocabulary vocab,
                     std::vector<TranscribedLine> lines)
    : model_(model), settings_(std::move(settings)), init_(init), vocab_(std::move(vocab)), lines_(std::move(lines)) {
  if (lines_.empty()) throw ValidationError("fine-tuning needs at least one labeled line");
  if (settings_.batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (settings_.epochs < 1) throw ValidationError("fine-tuning needs at least one epoch");
  if (settings_.freeze_epochs < 0) throw ValidationError("freeze epochs must be >= 0");
  settings_.schedule.total_updates = static_cast<std::int64_t>(settings_.epochs) * batches_per_epoch();
  validate(settings_.schedule);

  const ShapePlan shape(model_);
  for (const auto& line : lines_) {
    if (line.image.height() != model_.image_height) {
      throw ValidationError("line '" + line.image.source_id + "' has height " + std::to_string(line.image.height()) +
                            ", expected " + std::to_string(model_.image_height));
    }
    std::vector<int> label;
    try {
      label = vocab_.encode(line.text);
    } catch (const ValidationError& e) {
      throw ValidationError("line '" + line.image.source_id + "': " + e.what());
    }
    if (label.empty()) throw ValidationError("line '" + line.image.source_id + "' has an empty transcript");
    const bool ok = shape.time_steps(line.image.width_px()) >= ctc_min_frames(label);
    feasible_.push_back(ok);
    if (!ok) infeasible_.push_back(line.image.source_id);
    labels_.push_back(std::move(label));
  }
  if (infeasible_.size() == lines_.size()) {
    throw ValidationError("no labeled line is wide enough for its transcript");
  }
  feature_cache_.resize(lines_.size());
  context_cache_.resize(lines_.size());
}

int Finetuner::batches_per_epoch() const {
  return static_cast<int>((lines_.size() + settings_.batch_size - 1) / settings_.batch_size);
}

FinetuneProgress Finetuner::initial_progress(const ParameterSet<float>* pretrained) const {
  if ((pretrained != nullptr) != (init_ == InitKind::kPretrained)) {
    throw ValidationError("pretrained parameters must be given exactly when initializing from a checkpoint");
  }
  FinetuneProgress p;
  Rng head_rng(derive_seed(settings_.seed, kHeadStream));
  ParameterSet<double> encoder;
  if (pretrained) {
    const std::vector<std::string> diff = shape_diff(*pretrained, model_);
    if (!diff.empty()) {
      std::string msg = "checkpoint does not match the model configuration:";
      for (const auto& d : diff) msg += "\n  " + d;
      throw ValidationError(msg);
    }
    encoder = pretrained->cast<double>();
  } else {
    Rng rng(derive_seed(settings_.seed, kInitStream));
    encoder = init_encoder(model_, rng);
  }
  encoder.erase_prefix(param_names::kMaskEmbedding);
  encoder.erase_prefix("score.");
  encoder.erase_prefix("vocab.");
  add_vocab_head(encoder, model_, vocab_.size(), head_rng);
  p.params = encoder.cast<float>();
  p.adam = AdamState<float>::like(p.params, settings_.adam);
  return p;
}

bool Finetuner::trainable(const std::string& name, int epoch) const {
  switch (group_of(name)) {
    case ParamGroup::kVocabHead:
      return true;
    case ParamGroup::kContext:
      return init_ == InitKind::kScratch || epoch >= settings_.freeze_epochs;
    case ParamGroup::kExtractor:
      return init_ == InitKind::kScratch;
    case ParamGroup::kPretrainHead:
      return false;
  }
  return false;
}

LineInput<float> Finetuner::input_for(std::size_t line, const FinetuneProgress& progress, int epoch) {
  LineInput<float> in;
  const bool extractor_frozen = !trainable(param_names::conv_weight(0), epoch);
  const bool context_frozen = extractor_frozen && !trainable(param_names::lstm(0, false, "w_ih"), epoch);
  if (!extractor_frozen) {
    in.pixels = &lines_[line].image.pixels;
    return in;
  }
  Tensorf& features = feature_cache_[line];
  if (features.size() == 0) features = encode_features(progress.params, lines_[line].image.pixels, model_);
  if (!context_frozen) {
    in.features = &features;
    return in;
  }
  Tensorf& context = context_cache_[line];
  if (context.size() == 0) context = encode_context(progress.params, features, model_);
  in.context = &context;
  return in;
}

FinetuneMetrics Finetuner::run_epoch(FinetuneProgress& progress) {
  const int epoch = progress.epoch;
  if (epoch >= settings_.epochs) throw ValidationError("fine-tuning already complete");
  // Context caches are stale once the BiLSTM trains.
  if (trainable(param_names::lstm(0, false, "w_ih"), epoch)) {
    for (auto& c : context_cache_) c.resize(0, 0);
  }
  const auto selected = [this, epoch](const std::string& name) { return trainable(name, epoch); };

  Rng order_rng(derive_seed(settings_.seed, kEpochStream, static_cast<std::uint64_t>(epoch)));
  const std::vector<std::size_t> order = permutation(lines_.size(), order_rng);

  FinetuneMetrics m;
  m.epoch = epoch;
  double loss_sum = 0.0;
  int loss_count = 0;
  const std::size_t batch_size = static_cast<std::size_t>(settings_.batch_size);
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
    const std::size_t end = std::min(order.size(), begin + batch_size);
    std::vector<std::size_t> batch;
    for (std::size_t i = begin; i < end; ++i) {
      if (feasible_[order[i]]) batch.push_back(order[i]);
    }
    m.skipped_lines += static_cast<int>((end - begin) - batch.size());
    const double lr = lr_at(settings_.schedule, progress.update + 1);
    m.lr = lr;

    if (!batch.empty()) {
      // Fill caches serially so workers only read shared state.
      std::vector<LineInput<float>> inputs;
      for (std::size_t line : batch) inputs.push_back(input_for(line, progress, epoch));

      struct WorkerResult {
        ParameterSet<float> grads;
        double loss = 0.0;
      };
      const int workers = std::max(1, std::min<int>(settings_.workers, static_cast<int>(batch.size())));
      std::vector<WorkerResult> results(static_cast<std::size_t>(workers));
      parallel_chunks(batch.size(), workers, [&](int w, std::size_t lo, std::size_t hi) {
        WorkerResult& r = results[static_cast<std::size_t>(w)];
        for (const auto& e : progress.params.entries()) {
          if (selected(e.name)) r.grads.add(e.name, Tensorf::Zero(e.value.rows(), e.value.cols()));
        }
        for (std::size_t k = lo; k < hi; ++k) {
          const CtcLineResult<float> res = ctc_line(progress.params, model_, inputs[k], labels_[batch[k]], &r.grads);
          r.loss += res.loss;
        }
      });
      ParameterSet<float> grads = std::move(results[0].grads);
      double batch_loss = results[0].loss;
      for (std::size_t w = 1; w < results.size(); ++w) {
        for (auto& e : grads.entries()) e.value += results[w].grads.at(e.name);
        batch_loss += results[w].loss;
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("non-finite CTC loss at epoch " + std::to_string(epoch));
      }
      const float inv = 1.0f / static_cast<float>(batch.size());
      for (auto& e : grads.entries()) e.value *= inv;
      if (settings_.clip_norm > 0.0) {
        const double norm = global_norm<float>(grads, nullptr);
        if (norm > settings_.clip_norm) {
          const float scale = static_cast<float>(settings_.clip_norm / norm);
          for (auto& e : grads.entries()) e.value *= scale;
        }
      }
      adam_step(progress.params, grads, progress.adam, lr, selected);
      loss_sum += batch_loss;
      loss_count += static_cast<int>(batch.size());
    }
    progress.update += 1;
  }
  m.loss = loss_count ? loss_sum / loss_count : 0.0;

  // Probe: decode the first lines with the updated parameters.
  const std::size_t probe = std::min<std::size_t>(lines_.size(), static_cast<std::size_t>(std::max(0, settings_.probe_lines)));
  long edits = 0;
  long ref = 0;
  for (std::size_t i = 0; i < probe; ++i) {
    const LineInput<float> in = input_for(i, progress, epoch);
    Tensorf logits;
    if (in.context) {
      logits = compute_logits(progress.params, *in.context);
    } else if (in.features) {
      logits = compute_logits(progress.params, encode_context(progress.params, *in.features, model_));
    } else {
      logits = line_logits(progress.params, *in.pixels, model_);
    }
    const Decoding d = greedy_decode(logits, vocab_);
    edits += edit_distance(d.symbols, lines_[i].text);
    ref += static_cast<long>(lines_[i].text.size());
  }
  m.probe_cer = ref ? static_cast<double>(edits) / static_cast<double>(ref) : 0.0;
  progress.epoch = epoch + 1;
  return m;
}

void Finetuner::run(FinetuneProgress& progress,
                    const std::function<void(const FinetuneMetrics&, const FinetuneProgress&)>& on_epoch) {
  while (progress.epoch < settings_.epochs) {
    const FinetuneMetrics m = run_epoch(progress);
    if (on_epoch) on_epoch(m, progress);
  }
}

}  // namespace lacuna
