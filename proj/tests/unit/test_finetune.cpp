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

#include <cmath>

#include "../support/fd_check.hpp"
#include "../support/synth_lines.hpp"
#include "doctest.h"
#include "lacuna/corpus/vocabulary.hpp"
#include "lacuna/finetune/ctc.hpp"
#include "lacuna/finetune/trainer.hpp"

using namespace lacuna;

namespace {

Tensord randn(long r, long c, Rng& rng) {
  Tensord m(r, c);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("two frames, one symbol, uniform logits") {
  const Tensord logits = Tensord::Zero(2, 2);
  const std::vector<int> label{1};
  const auto r = ctc(logits, label, 0, false);
  CHECK(r.feasible);
  CHECK(r.loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
  CHECK(r.loss == doctest::Approx(0.2877).epsilon(1e-4));
}

TEST_CASE("repeated symbols need a separating blank") {
  const std::vector<int> aa{1, 1}, ab{1, 2}, aba{1, 2, 1};
  CHECK(ctc_min_frames(aa) == 3);
  CHECK(ctc_min_frames(ab) == 2);
  CHECK(ctc_min_frames(aba) == 3);
  const auto r = ctc(Tensord(Tensord::Zero(2, 3)), aa, 0, true);
  CHECK_FALSE(r.feasible);
  CHECK(std::isinf(r.loss));
  CHECK(r.grad.size() == 0);
}

TEST_CASE("a label as long as the input has a single path") {
  Rng rng(1);
  const Tensord logits = randn(3, 5, rng);
  const std::vector<int> label{2, 4, 1};
  double expected = 0.0;
  for (int t = 0; t < 3; ++t) {
    const double lse = std::log(logits.row(t).array().exp().sum());
    expected -= logits(t, label[static_cast<std::size_t>(t)]) - lse;
  }
  CHECK(ctc(logits, label, 0, false).loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ctc gradient matches finite differences") {
  Rng rng(2);
  const Tensord logits = randn(7, 4, rng);
  const std::vector<int> label{1, 1, 3};
  const auto r = ctc(logits, label, 0, true);
  REQUIRE(r.feasible);
  const auto report = testing::fd_check_input<Tensord>(
      logits, r.grad, [&](const Tensord& x) { return ctc(x, label, 0, false).loss; });
  CHECK(report.max_rel < 1e-6);
  // Each row of the gradient sums to zero (softmax minus a distribution).
  for (long t = 0; t < r.grad.rows(); ++t) CHECK(std::abs(r.grad.row(t).sum()) < 1e-12);
}

TEST_CASE("malformed labels are rejected") {
  const Tensord logits = Tensord::Zero(4, 3);
  const std::vector<int> empty, blank{0, 1}, outside{5};
  CHECK_THROWS_AS(ctc(logits, empty, 0, false), ValidationError);
  CHECK_THROWS_AS(ctc(logits, blank, 0, false), ValidationError);
  CHECK_THROWS_AS(ctc(logits, outside, 0, false), ValidationError);
}

namespace {

FinetuneSettings tiny_settings(int epochs, int freeze) {
  FinetuneSettings s;
  s.epochs = epochs;
  s.freeze_epochs = freeze;
  s.batch_size = 2;
  s.probe_lines = 2;
  s.seed = 4;
  return s;
}

std::uint64_t checksum(const ParameterSet<float>& p, ParamGroup group) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& e : p.entries()) {
    if (group_of(e.name) != group) continue;
    const auto* bytes = reinterpret_cast<const unsigned char*>(e.value.data());
    for (long i = 0; i < e.value.size() * static_cast<long>(sizeof(float)); ++i) h = (h ^ bytes[i]) * 1099511628211ULL;
  }
  return h;
}

}  // namespace

TEST_CASE("freeze regime decides which groups train") {
  const ModelConfig cfg = ModelConfig::test_config();
  const auto lines = testing::synth_lines(2, 3, 3, 5);
  const Vocabulary vocab = build_vocab(std::span<const TranscribedLine>(lines));
  const Finetuner pre(cfg, tiny_settings(3, 2), InitKind::kPretrained, vocab, lines);
  CHECK(pre.trainable("vocab.weight", 0));
  CHECK_FALSE(pre.trainable("conv1.weight", 0));
  CHECK_FALSE(pre.trainable("conv1.weight", 5));
  CHECK_FALSE(pre.trainable("lstm.l0.fwd.w_ih", 1));
  CHECK(pre.trainable("lstm.l0.fwd.w_ih", 2));
  const Finetuner scratch(cfg, tiny_settings(3, 2), InitKind::kScratch, vocab, lines);
  CHECK(scratch.trainable("conv1.weight", 0));
  CHECK(scratch.trainable("lstm.l0.fwd.w_ih", 0));
  CHECK(pre.total_updates() == 3);
}

TEST_CASE("pretrained encoder stays frozen until the boundary") {
  const ModelConfig cfg = ModelConfig::test_config();
  const auto lines = testing::synth_lines(2, 3, 3, 5);
  const Vocabulary vocab = build_vocab(std::span<const TranscribedLine>(lines));
  Rng rng(8);
  const ParameterSet<float> pretrained = init_encoder(cfg, rng).cast<float>();
  Finetuner ft(cfg, tiny_settings(3, 2), InitKind::kPretrained, vocab, lines);
  FinetuneProgress p = ft.initial_progress(&pretrained);
  CHECK_FALSE(p.params.contains(param_names::kMaskEmbedding));
  CHECK(p.params.contains("vocab.weight"));
  const auto conv0 = checksum(p.params, ParamGroup::kExtractor);
  const auto lstm0 = checksum(p.params, ParamGroup::kContext);
  const auto head0 = checksum(p.params, ParamGroup::kVocabHead);
  ft.run_epoch(p);
  ft.run_epoch(p);
  CHECK(checksum(p.params, ParamGroup::kContext) == lstm0);
  CHECK(checksum(p.params, ParamGroup::kVocabHead) != head0);
  ft.run_epoch(p);
  CHECK(checksum(p.params, ParamGroup::kContext) != lstm0);
  CHECK(checksum(p.params, ParamGroup::kExtractor) == conv0);
  CHECK(p.epoch == 3);
}

TEST_CASE("checkpoints of another shape are refused") {
  const auto lines = testing::synth_lines(2, 3, 3, 5);
  const Vocabulary vocab = build_vocab(std::span<const TranscribedLine>(lines));
  ModelConfig other = ModelConfig::test_config();
  other.lstm_hidden = 16;
  Rng rng(9);
  const ParameterSet<float> wrong = init_encoder(other, rng).cast<float>();
  const Finetuner ft(ModelConfig::test_config(), tiny_settings(1, 0), InitKind::kPretrained, vocab, lines);
  CHECK_THROWS_AS(ft.initial_progress(&wrong), ValidationError);
}

TEST_CASE("lines whose label cannot fit are skipped") {
  auto lines = testing::synth_lines(2, 3, 3, 5);
  // 40 px gives T = 3 frames; "aaa" needs 5.
  lines.push_back(TranscribedLine{LineImage{Bitmap::Zero(96, 40), "narrow"}, U"aaa"});
  const Vocabulary vocab = build_vocab(std::span<const TranscribedLine>(lines));
  Finetuner ft(ModelConfig::test_config(), tiny_settings(1, 0), InitKind::kScratch, vocab, lines);
  REQUIRE(ft.infeasible_lines().size() == 1);
  CHECK(ft.infeasible_lines()[0] == "narrow");
  FinetuneProgress p = ft.initial_progress(nullptr);
  const FinetuneMetrics m = ft.run_epoch(p);
  CHECK(std::isfinite(m.loss));
  CHECK(m.skipped_lines == 1);
}
