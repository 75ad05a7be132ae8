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
#include <set>

#include "../support/fd_check.hpp"
#include "../support/synth_lines.hpp"
#include "doctest.h"
#include "lacuna/pretrain/contrastive.hpp"
#include "lacuna/pretrain/trainer.hpp"

using namespace lacuna;

TEST_CASE("foils are distinct steps of the same line") {
  Rng rng(1);
  const std::vector<int> positions{0, 5, 12};
  const FoilPlan plan = sample_foils(13, positions, 100, rng);
  REQUIRE(plan.candidates.size() == 3);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto& c = plan.candidates[i];
    CHECK(c[0] == positions[i]);
    CHECK(c.size() == 13);  // 12 foils: every other step
    const std::set<int> uniq(c.begin(), c.end());
    CHECK(uniq.size() == c.size());
    for (int t : c) CHECK((t >= 0 && t < 13));
  }
  const FoilPlan few = sample_foils(200, positions, 100, rng);
  for (const auto& c : few.candidates) {
    CHECK(c.size() == 101);
    CHECK(std::count(c.begin() + 1, c.end(), c[0]) == 0);
  }
  const std::vector<int> lone{0};
  CHECK(sample_foils(1, lone, 100, rng).foil_count() == 0);
}

TEST_CASE("candidate loss closed forms") {
  std::vector<double> equal(101, 0.3);
  CHECK(candidate_nll(equal) == doctest::Approx(std::log(101.0)).epsilon(1e-12));
  std::vector<double> sharp(101, -1.0);
  sharp[0] = 1.0;
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 100.0 * std::exp(-1.0)));
  CHECK(candidate_nll(sharp) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(2.6765).epsilon(1e-4));
  // A position without foils contributes -log(1).
  const std::vector<double> alone{0.7};
  CHECK(candidate_nll(alone) == 0.0);
  // Temperature scales the scores.
  CHECK(candidate_nll(sharp, 2.0) ==
        doctest::Approx(-std::log(std::exp(0.5) / (std::exp(0.5) + 100.0 * std::exp(-0.5)))).epsilon(1e-12));
}

TEST_CASE("cosine candidate loss gradient") {
  Rng rng(2);
  const auto randn = [&](long r, long c) {
    Tensord m(r, c);
    for (long i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
    return m;
  };
  const Tensord pc = randn(9, 4);
  Tensord ph = randn(9, 4);
  ph.row(7).setZero();  // exercises the zero-norm guard
  const std::vector<int> positions{1, 2, 6};
  const FoilPlan foils = sample_foils(9, positions, 5, rng);
  const auto loss = [&](const Tensord& c, const Tensord& h, Tensord* gc, Tensord* gh) {
    ad::Tape<double> tape;
    ad::Var vc = tape.input(c, true), vh = tape.input(h, true);
    ContrastiveBatchResult r;
    ad::Var out = cosine_candidate_loss(tape, vc, vh, foils, 0.5, r);
    if (gc) {
      tape.backward(out);
      *gc = tape.grad(vc);
      *gh = tape.grad(vh);
    }
    return tape.value(out)(0, 0);
  };
  Tensord gc, gh;
  loss(pc, ph, &gc, &gh);
  const auto rc = testing::fd_check_input<Tensord>(pc, gc, [&](const Tensord& c) { return loss(c, ph, nullptr, nullptr); });
  CHECK(rc.max_rel < 1e-6);
  Tensord gh_masked = gh;
  // The zero row has no defined derivative; compare the others only.
  const auto rh = testing::fd_check_input<Tensord>(ph, gh, [&](const Tensord& h) { return loss(pc, h, nullptr, nullptr); });
  CHECK(gh.row(7).isZero());
  CHECK(rh.checked == ph.size());
}

TEST_CASE("statistics merge as a mean over positions") {
  ContrastiveBatchResult a, b;
  a.per_position_losses = {1.0, 3.0};
  a.n_masked = 2;
  a.n_correct = 1;
  b.per_position_losses = {5.0};
  b.n_masked = 1;
  ContrastiveBatchResult m;
  m.merge(a);
  m.merge(b);
  CHECK(m.loss == doctest::Approx(3.0));
  CHECK(m.accuracy() == doctest::Approx(1.0 / 3.0));
}

namespace {

PretrainSettings small_settings(std::int64_t updates) {
  PretrainSettings s;
  s.schedule.total_updates = updates;
  s.schedule.peak_lr = 2e-3;
  s.batch_size = 8;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("pre-training lowers the contrastive loss") {
  const auto lines = testing::images_of(testing::synth_lines(100, 5));
  const Pretrainer trainer(ModelConfig::test_config(), small_settings(50), lines);
  PretrainProgress progress = trainer.initial_progress();
  std::vector<double> losses;
  trainer.run(progress, 50, [&](const PretrainMetrics& m, const PretrainProgress&) { losses.push_back(m.loss); });
  REQUIRE(losses.size() == 50);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 10; ++i) {
    first += losses[static_cast<std::size_t>(i)];
    last += losses[losses.size() - 1 - static_cast<std::size_t>(i)];
  }
  MESSAGE("mean loss first 10: " << first / 10 << ", last 10: " << last / 10);
  CHECK(last < first);
}

TEST_CASE("pre-training is reproducible and resumable") {
  const auto lines = testing::images_of(testing::synth_lines(12, 6));
  const Pretrainer trainer(ModelConfig::test_config(), small_settings(6), lines);
  PretrainProgress straight = trainer.initial_progress();
  trainer.run(straight, 6, nullptr);
  PretrainProgress again = trainer.initial_progress();
  trainer.run(again, 3, nullptr);
  const PretrainProgress snapshot = again;
  PretrainProgress resumed = snapshot;
  trainer.run(resumed, 6, nullptr);
  CHECK(resumed.update == 6);
  for (std::size_t i = 0; i < straight.params.size(); ++i) {
    CHECK(straight.params.entries()[i].value == resumed.params.entries()[i].value);
  }
}

TEST_CASE("lines too short for a mask span are rejected up front") {
  std::vector<LineImage> lines{LineImage{Bitmap::Zero(96, 40), "tiny"}};
  CHECK_THROWS_AS(Pretrainer(ModelConfig::test_config(), small_settings(4), lines), ValidationError);
  CHECK_THROWS_AS(Pretrainer(ModelConfig::test_config(), small_settings(4), {}), ValidationError);
}
