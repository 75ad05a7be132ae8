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
#include <string>
#include <vector>

#include "lacuna/corpus/manifest.hpp"
#include "lacuna/random.hpp"
#include "lacuna/types.hpp"

namespace lacuna {

/// Settings of the synthetic corpus generator (flat key=value file).
///
/// `alphabet` lists the visible symbols; the word separator (space) is always
/// added, so the default yields 26 letters + 3 marks + space = 30 symbols.
/// Noise knobs: `noise` is the salt-and-pepper flip probability,
/// `ink_jitter` the per-line stroke-width range in px, `position_jitter` the
/// per-glyph and per-line offset range in px. All zero renders every glyph
/// instance of a style identically.
struct SynthConfig {
  std::vector<std::string> styles{"print", "script"};
  std::u32string alphabet = U"abcdefghijklmnopqrstuvwxyz.,-";
  int pretrain_lines = 5000;
  int finetune_lines = 30;
  int test_lines = 100;
  double noise = 0.01;
  int ink_jitter = 1;
  int position_jitter = 1;
  int min_chars = 18;
  int max_chars = 28;
  int lexicon_size = 300;
  std::uint64_t seed = 7;

  static SynthConfig parse(const std::string& text, const std::string& origin = "<string>");
  static SynthConfig load(const std::filesystem::path& path);
  /// Throws ValidationError on alphabet/style mismatches or bad ranges.
  void validate() const;
};

/// Procedurally generated glyph set of one visual style.
class GlyphFont {
 public:
  GlyphFont(const std::string& style, const std::u32string& alphabet, std::uint64_t seed);

  const std::string& style() const { return style_; }

  /// Renders `text` on a 96-px canvas (1 = ink), before pixel noise.
  /// `rng` drives ink-width and position jitter only.
  Bitmap render(std::u32string_view text, int ink_jitter, int position_jitter, Rng& rng) const;

  /// Advance of one character in px, including inter-glyph spacing.
  int advance(char32_t c) const;

 private:
  struct Point {
    double x;
    double y;
  };
  struct Glyph {
    int width = 0;
    std::vector<std::vector<Point>> strokes;
  };

  const Glyph& glyph(char32_t c) const;

  std::string style_;
  std::u32string alphabet_;
  std::vector<Glyph> glyphs_;
  int base_thickness_ = 3;
  int spacing_ = 2;
  int space_width_ = 12;
  double slant_ = 0.0;
};

/// Word list drawn from the letters of an alphabet, with Zipf frequencies.
class Lexicon {
 public:
  Lexicon(const std::u32string& alphabet, int size, std::uint64_t seed);
  /// Words joined by spaces, with occasional marks, totalling
  /// [min_chars, max_chars] codepoints.
  std::u32string line(int min_chars, int max_chars, Rng& rng) const;

 private:
  std::vector<std::u32string> words_;
  std::vector<double> cumulative_;
  std::u32string marks_;
};

/// Flips each pixel with probability `p`.
void salt_and_pepper(Bitmap& binary, double p, Rng& rng);

/// Renders and writes the corpus under `out_dir`:
/// lines/<split>_<index>.png (+ .txt for labeled splits), manifest.tsv with
/// every line, and one <split>.tsv per split. Deterministic given the seed.
Manifest synth_corpus(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace lacuna
