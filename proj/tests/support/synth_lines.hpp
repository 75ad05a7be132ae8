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

#include "lacuna/corpus/line_image.hpp"
#include "lacuna/corpus/synth.hpp"

namespace lacuna::testing {

/// In-memory synthetic lines from the default generator settings.
inline std::vector<TranscribedLine> synth_lines(int count, std::uint64_t seed, int min_chars = 18,
                                                int max_chars = 28, double noise = 0.01) {
  const SynthConfig cfg;
  const GlyphFont font("print", cfg.alphabet, seed);
  const Lexicon lexicon(cfg.alphabet, cfg.lexicon_size, seed);
  std::vector<TranscribedLine> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 99, static_cast<std::uint64_t>(i)));
    TranscribedLine line;
    line.text = lexicon.line(min_chars, max_chars, rng);
    Bitmap ink = font.render(line.text, cfg.ink_jitter, cfg.position_jitter, rng);
    salt_and_pepper(ink, noise, rng);
    line.image = LineImage{ink, "line" + std::to_string(i)};
    out.push_back(std::move(line));
  }
  return out;
}

inline std::vector<LineImage> images_of(const std::vector<TranscribedLine>& lines) {
  std::vector<LineImage> out;
  for (const auto& l : lines) out.push_back(l.image);
  return out;
}

}  // namespace lacuna::testing
