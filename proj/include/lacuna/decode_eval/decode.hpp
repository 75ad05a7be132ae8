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

#include <string>
#include <vector>

#include "lacuna/corpus/vocabulary.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

struct Decoding {
  std::u32string symbols;
  std::vector<int> frame_argmax;
};

/// Per-frame argmax, ties toward the lowest index.
template <typename Scalar>
std::vector<int> frame_argmax(const Tensor<Scalar>& logits) {
  std::vector<int> best(static_cast<std::size_t>(logits.rows()));
  for (long t = 0; t < logits.rows(); ++t) {
    long k = 0;
    for (long j = 1; j < logits.cols(); ++j) {
      if (logits(t, j) > logits(t, k)) k = j;
    }
    best[static_cast<std::size_t>(t)] = static_cast<int>(k);
  }
  return best;
}

/// Collapses repeats, then drops blanks: [a,a,-,b] -> ab, [a,-,a] -> aa.
std::vector<int> collapse_path(const std::vector<int>& path, int blank = Vocabulary::kBlank);

/// Greedy CTC decoding without any language model.
template <typename Scalar>
Decoding greedy_decode(const Tensor<Scalar>& logits, const Vocabulary& vocab) {
  if (logits.cols() != vocab.size()) {
    throw ValidationError("logits have " + std::to_string(logits.cols()) + " classes, vocabulary has " +
                          std::to_string(vocab.size()));
  }
  Decoding d;
  d.frame_argmax = frame_argmax(logits);
  const std::vector<int> labels = collapse_path(d.frame_argmax);
  d.symbols = vocab.decode(labels);
  return d;
}

}  // namespace lacuna
