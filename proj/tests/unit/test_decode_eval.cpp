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

#include <vector>

#include "doctest.h"
#include "lacuna/decode_eval/cer.hpp"
#include "lacuna/decode_eval/decode.hpp"
#include "lacuna/decode_eval/evaluate.hpp"

using namespace lacuna;

namespace {

// Explicit rule: drop a frame equal to its predecessor, then drop blanks.
std::vector<int> collapse_oracle(const std::vector<int>& path) {
  std::vector<int> kept;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0 && path[i] == path[i - 1]) continue;
    kept.push_back(path[i]);
  }
  std::vector<int> out;
  for (int k : kept)
    if (k != 0) out.push_back(k);
  return out;
}

Tensord one_hot_logits(const std::vector<int>& path, int vocab) {
  Tensord l = Tensord::Zero(static_cast<long>(path.size()), vocab);
  for (std::size_t t = 0; t < path.size(); ++t) l(static_cast<long>(t), path[t]) = 5.0;
  return l;
}

}  // namespace

TEST_CASE("greedy decoding collapses repeats before removing blanks") {
  const Vocabulary v(std::vector<char32_t>{U'a', U'b'});
  CHECK(greedy_decode(one_hot_logits({1, 1, 0, 2}, 3), v).symbols == U"ab");
  CHECK(greedy_decode(one_hot_logits({1, 0, 1}, 3), v).symbols == U"aa");
  CHECK(greedy_decode(one_hot_logits({0, 0, 0}, 3), v).symbols.empty());
  CHECK_THROWS_AS(greedy_decode(Tensord(Tensord::Zero(2, 4)), v), ValidationError);
}

TEST_CASE("collapse agrees with the explicit rule on random paths") {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> path(1 + uniform_index(rng, 12));
    for (int& k : path) k = static_cast<int>(uniform_index(rng, 3));
    CHECK(collapse_path(path) == collapse_oracle(path));
  }
}

TEST_CASE("ties break toward the lowest index") {
  const Tensord l = Tensord::Zero(2, 3);
  CHECK(frame_argmax(l) == (std::vector<int>{0, 0}));
}

TEST_CASE("character error rate") {
  CHECK(cer(U"abc", U"abc") == 0.0);
  CHECK(cer(U"axc", U"abc") == doctest::Approx(1.0 / 3.0));
  CHECK(cer(U"", U"ab") == 1.0);
  CHECK(edit_distance(U"kitten", U"sitting") == 3);
  CHECK(edit_distance(U"abcd", U"") == 4);
  CHECK(cer(U"abab", U"ab") == 1.0);
  CHECK_THROWS_AS(cer(U"a", U""), ValidationError);
}

TEST_CASE("aggregate is a micro average over reference characters") {
  CerReport r;
  r.add(CerLine{"a", 0, 10, 0.0, U""});
  r.add(CerLine{"b", 30, 30, 1.0, U""});
  CHECK(r.aggregate() == doctest::Approx(0.75));
  CHECK(r.total_edits == 30);
  CHECK(r.total_ref == 40);
  CHECK(summary(r) == "CER 75.0% (30/40 over 2 lines)");
  const std::string tsv = report_tsv(r);
  CHECK(tsv.rfind("source_id\tedit_distance\tref_len\tcer\n", 0) == 0);
  CHECK(tsv.find("b\t30\t30\t1.000000\n") != std::string::npos);
  CHECK(tsv.find("<aggregate>\t30\t40\t0.750000") != std::string::npos);
  CHECK(CerReport{}.aggregate() == 0.0);
}

TEST_CASE("blank lines transcribe to nothing") {
  const ModelConfig cfg = ModelConfig::test_config();
  Rng rng(2);
  ParameterSet<double> p = init_encoder(cfg, rng);
  add_vocab_head(p, cfg, 3, rng);
  const ParameterSet<float> pf = p.cast<float>();
  const Vocabulary v(std::vector<char32_t>{U'a', U'b'});
  CHECK(transcribe_line(pf, cfg, v, LineImage{Bitmap::Zero(96, 600), "blank"}).empty());
  CHECK(transcribe_line(pf, cfg, v, LineImage{Bitmap::Ones(96, 10), "narrow"}).empty());
  const Vocabulary wrong(std::vector<char32_t>{U'a'});
  CHECK_THROWS_AS(transcribe_line(pf, cfg, wrong, LineImage{Bitmap::Zero(96, 600), "x"}), ValidationError);
  // Same input, same output.
  Bitmap ink = Bitmap::Zero(96, 300);
  ink.block(30, 20, 30, 200).setOnes();
  const LineImage line{ink, "ink"};
  CHECK(transcribe_line(pf, cfg, v, line) == transcribe_line(pf, cfg, v, line));
}
