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

#include "lacuna/corpus/synth.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "lacuna/corpus/line_image.hpp"
#include "lacuna/corpus/png_io.hpp"
#include "lacuna/corpus/unicode.hpp"
#include "lacuna/key_value.hpp"

namespace lacuna {

namespace fs = std::filesystem;

namespace {

// Vertical layout of the 96-px canvas.
constexpr double kAscender = 22;
constexpr double kXHeight = 38;
constexpr double kMiddle = 50;
constexpr double kBaseline = 62;
constexpr double kDescender = 76;

constexpr std::uint8_t kInkGray = 40;
constexpr std::uint8_t kPageGray = 215;

bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)) != 0; }

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

double uniform_between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_real(rng); }

}  // namespace

SynthConfig SynthConfig::parse(const std::string& text, const std::string& origin) {
  const KeyValueFile kv = KeyValueFile::parse(text, origin);
  kv.reject_unknown({"styles", "alphabet", "pretrain_lines", "finetune_lines", "test_lines", "noise", "ink_jitter",
                     "position_jitter", "min_chars", "max_chars", "lexicon_size", "seed"});
  SynthConfig c;
  for (const auto& [key, value] : kv.values()) {
    if (key == "styles") c.styles = split_list(value);
    else if (key == "alphabet") c.alphabet = nfd_from_utf8(value);
    else if (key == "pretrain_lines") c.pretrain_lines = parse_int(key, value);
    else if (key == "finetune_lines") c.finetune_lines = parse_int(key, value);
    else if (key == "test_lines") c.test_lines = parse_int(key, value);
    else if (key == "noise") c.noise = parse_double(key, value);
    else if (key == "ink_jitter") c.ink_jitter = parse_int(key, value);
    else if (key == "position_jitter") c.position_jitter = parse_int(key, value);
    else if (key == "min_chars") c.min_chars = parse_int(key, value);
    else if (key == "max_chars") c.max_chars = parse_int(key, value);
    else if (key == "lexicon_size") c.lexicon_size = parse_int(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
  }
  c.validate();
  return c;
}

SynthConfig SynthConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read synth config '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text, path.string());
}

void SynthConfig::validate() const {
  if (styles.empty()) throw ValidationError("synth config names no styles");
  std::set<std::string> seen_styles;
  for (const auto& s : styles) {
    if (s != "print" && s != "script") {
      throw ValidationError("alphabet/style mismatch: no glyph generator for style '" + s + "' (known: print, script)");
    }
    if (!seen_styles.insert(s).second) throw ValidationError("style '" + s + "' listed twice");
  }
  std::set<char32_t> seen;
  int letters = 0;
  for (char32_t c : alphabet) {
    if (c == U' ') throw ValidationError("alphabet must not list the space; it is always included");
    if (!seen.insert(c).second) {
      throw ValidationError("alphabet/style mismatch: symbol '" + codepoints_to_utf8(std::u32string(1, c)) +
                            "' listed twice");
    }
    letters += is_letter(c) ? 1 : 0;
  }
  if (letters < 2) throw ValidationError("alphabet/style mismatch: alphabet needs at least two letters to form words");
  if (pretrain_lines < 0 || finetune_lines < 0 || test_lines < 0) throw ValidationError("line counts must be >= 0");
  if (noise < 0.0 || noise > 0.5) throw ValidationError("noise must be in [0, 0.5]");
  if (ink_jitter < 0 || ink_jitter > 3) throw ValidationError("ink_jitter must be in [0, 3]");
  if (position_jitter < 0 || position_jitter > 4) throw ValidationError("position_jitter must be in [0, 4]");
  if (min_chars < 1 || max_chars < min_chars || max_chars > 60) {
    throw ValidationError("need 1 <= min_chars <= max_chars <= 60");
  }
  if (lexicon_size < 1) throw ValidationError("lexicon_size must be >= 1");
}

GlyphFont::GlyphFont(const std::string& style, const std::u32string& alphabet, std::uint64_t seed)
    : style_(style), alphabet_(alphabet) {
  const bool script = style == "script";
  if (!script && style != "print") throw ValidationError("no glyph generator for style '" + style + "'");
  base_thickness_ = script ? 2 : 3;
  spacing_ = script ? 1 : 3;
  space_width_ = script ? 10 : 12;
  slant_ = script ? 0.25 : 0.0;
  const std::uint64_t style_seed = derive_seed(seed, script ? 2 : 1);
  glyphs_.reserve(alphabet.size());
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    Rng rng(derive_seed(style_seed, alphabet[i]));
    Glyph g;
    if (!is_letter(alphabet[i])) {
      // Marks: one or two short strokes in a small box at a random level.
      g.width = uniform_int(rng, 5, 8);
      const double levels[] = {kBaseline - 4, kMiddle, kXHeight};
      const double y0 = levels[uniform_index(rng, 3)];
      const int n = uniform_int(rng, 1, 2);
      for (int s = 0; s < n; ++s) {
        g.strokes.push_back({{uniform_between(rng, 1, g.width - 1), y0 + uniform_between(rng, -3, 3)},
                             {uniform_between(rng, 1, g.width - 1), y0 + uniform_between(rng, -3, 6)}});
      }
      glyphs_.push_back(std::move(g));
      continue;
    }
    g.width = script ? uniform_int(rng, 14, 22) : uniform_int(rng, 14, 22);
    const double w = g.width - 1;
    const bool ascender = uniform_real(rng) < 0.3;
    const bool descender = !ascender && uniform_real(rng) < 0.25;
    const double top = ascender ? kAscender : kXHeight;
    const double bottom = descender ? kDescender : kBaseline;
    if (ascender || descender) {
      const double x = w * uniform_between(rng, 0.15, 0.85);
      g.strokes.push_back({{x, top}, {x, descender ? bottom : kBaseline}});
    }
    if (!script) {
      const double xs[] = {0.0, w / 2, w};
      const double ys[] = {kXHeight, kMiddle, kBaseline};
      const int n = uniform_int(rng, 2, 3);
      for (int s = 0; s < n; ++s) {
        std::vector<Point> stroke;
        const int points = uniform_int(rng, 2, 3);
        for (int p = 0; p < points; ++p) stroke.push_back({xs[uniform_index(rng, 3)], ys[uniform_index(rng, 3)]});
        if (stroke.size() == 2 && stroke[0].x == stroke[1].x && stroke[0].y == stroke[1].y) stroke[1].x = w - stroke[1].x;
        g.strokes.push_back(std::move(stroke));
      }
    } else {
      // Cubic curve through the x-height band, joined to both neighbours at the baseline.
      const int n = uniform_int(rng, 1, 2);
      for (int s = 0; s < n; ++s) {
        Point c[4];
        for (auto& p : c) p = {uniform_between(rng, 0, w), uniform_between(rng, kXHeight, kBaseline)};
        if (s == 0) c[0] = {0.0, kBaseline};
        if (s == n - 1) c[3] = {w, kBaseline};
        std::vector<Point> stroke;
        for (int k = 0; k <= 24; ++k) {
          const double t = k / 24.0;
          const double a = (1 - t) * (1 - t) * (1 - t), b = 3 * t * (1 - t) * (1 - t), cc = 3 * t * t * (1 - t),
                       d = t * t * t;
          stroke.push_back({a * c[0].x + b * c[1].x + cc * c[2].x + d * c[3].x,
                            a * c[0].y + b * c[1].y + cc * c[2].y + d * c[3].y});
        }
        g.strokes.push_back(std::move(stroke));
      }
    }
    glyphs_.push_back(std::move(g));
  }
}

const GlyphFont::Glyph& GlyphFont::glyph(char32_t c) const {
  const auto pos = alphabet_.find(c);
  if (pos == std::u32string::npos) {
    throw ValidationError("character '" + codepoints_to_utf8(std::u32string(1, c)) + "' has no glyph in style '" +
                          style_ + "'");
  }
  return glyphs_[pos];
}

int GlyphFont::advance(char32_t c) const {
  if (c == U' ') return space_width_;
  return glyph(c).width + spacing_;
}

Bitmap GlyphFont::render(std::u32string_view text, int ink_jitter, int position_jitter, Rng& rng) const {
  const int thickness = std::max(1, base_thickness_ + (ink_jitter ? uniform_int(rng, -ink_jitter, ink_jitter) : 0));
  const int line_dy = position_jitter ? uniform_int(rng, -2 * position_jitter, 2 * position_jitter) : 0;
  constexpr int kMargin = 8;
  const int slant_room = static_cast<int>(std::ceil(slant_ * (kBaseline - kAscender))) + 2;
  int width = 2 * kMargin + slant_room;
  for (char32_t c : text) width += advance(c);
  width = std::max(width, 6 * kLineHeight);
  Bitmap canvas = Bitmap::Zero(kLineHeight, width);

  auto stamp = [&](double px, double py) {
    const int cx = static_cast<int>(std::lround(px));
    const int cy = static_cast<int>(std::lround(py));
    const int lo = -(thickness - 1) / 2;
    const int hi = thickness / 2;
    for (int dy = lo; dy <= hi; ++dy) {
      for (int dx = lo; dx <= hi; ++dx) {
        const int y = cy + dy;
        const int x = cx + dx;
        if (y >= 0 && y < canvas.rows() && x >= 0 && x < canvas.cols()) canvas(y, x) = 1;
      }
    }
  };

  double cursor = kMargin;
  for (char32_t c : text) {
    if (c == U' ') {
      cursor += space_width_;
      continue;
    }
    const Glyph& g = glyph(c);
    const int gx = position_jitter ? uniform_int(rng, -position_jitter, position_jitter) : 0;
    const int gy = line_dy + (position_jitter ? uniform_int(rng, -position_jitter, position_jitter) : 0);
    for (const auto& stroke : g.strokes) {
      for (std::size_t k = 0; k + 1 < stroke.size(); ++k) {
        const Point a = stroke[k];
        const Point b = stroke[k + 1];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const int samples = std::max(1, static_cast<int>(std::ceil(len * 2)));
        for (int s = 0; s <= samples; ++s) {
          const double t = static_cast<double>(s) / samples;
          const double x = a.x + t * (b.x - a.x);
          const double y = a.y + t * (b.y - a.y);
          stamp(cursor + gx + x + slant_ * (kBaseline - y), y + gy);
        }
      }
    }
    cursor += g.width + spacing_;
  }
  return canvas;
}

Lexicon::Lexicon(const std::u32string& alphabet, int size, std::uint64_t seed) {
  std::u32string letters;
  for (char32_t c : alphabet) {
    if (is_letter(c)) letters.push_back(c);
    else marks_.push_back(c);
  }
  Rng rng(derive_seed(seed, 0x1e71c0));
  std::set<std::u32string> seen;
  double total = 0.0;
  int attempts = 0;
  while (static_cast<int>(words_.size()) < size && attempts++ < size * 100) {
    const int len = uniform_int(rng, 2, 7);
    std::u32string w;
    for (int i = 0; i < len; ++i) w.push_back(letters[uniform_index(rng, letters.size())]);
    if (!seen.insert(w).second) continue;
    words_.push_back(w);
    total += 1.0 / static_cast<double>(words_.size());
    cumulative_.push_back(total);
  }
  for (auto& c : cumulative_) c /= total;
}

std::u32string Lexicon::line(int min_chars, int max_chars, Rng& rng) const {
  const int target = uniform_int(rng, min_chars, max_chars);
  std::u32string out;
  while (static_cast<int>(out.size()) < target) {
    const double u = uniform_real(rng);
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), words_.size() - 1);
    if (!out.empty()) out.push_back(U' ');
    out += words_[idx];
    if (!marks_.empty() && uniform_real(rng) < 0.15) out.push_back(marks_[uniform_index(rng, marks_.size())]);
  }
  if (static_cast<int>(out.size()) > max_chars) out.resize(static_cast<std::size_t>(max_chars));
  while (!out.empty() && out.back() == U' ') out.pop_back();
  return out;
}

void salt_and_pepper(Bitmap& binary, double p, Rng& rng) {
  if (p <= 0.0) return;
  for (long i = 0; i < binary.size(); ++i) {
    if (uniform_real(rng) < p) binary.data()[i] ^= 1;
  }
}

Manifest synth_corpus(const SynthConfig& config, const fs::path& out_dir) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "lines", ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  std::vector<GlyphFont> fonts;
  for (const auto& s : config.styles) fonts.emplace_back(s, config.alphabet, config.seed);
  const Lexicon lexicon(config.alphabet, config.lexicon_size, config.seed);

  Manifest all;
  const std::pair<Split, int> plan[] = {{Split::kPretrain, config.pretrain_lines},
                                        {Split::kFinetune, config.finetune_lines},
                                        {Split::kTest, config.test_lines}};
  for (const auto& [split, count] : plan) {
    Manifest part;
    for (int i = 0; i < count; ++i) {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(split) + 1, static_cast<std::uint64_t>(i)));
      const GlyphFont& font = fonts[uniform_index(rng, fonts.size())];
      std::u32string text;
      Bitmap ink;
      // Redraw the rare line whose aspect ratio would be filtered out.
      for (int attempt = 0;; ++attempt) {
        text = lexicon.line(config.min_chars, config.max_chars, rng);
        ink = font.render(text, config.ink_jitter, config.position_jitter, rng);
        if (ink.cols() <= 23 * kLineHeight || attempt > 20) break;
      }
      salt_and_pepper(ink, config.noise, rng);
      Bitmap gray(ink.rows(), ink.cols());
      for (long k = 0; k < ink.size(); ++k) gray.data()[k] = ink.data()[k] ? kInkGray : kPageGray;

      char stem[64];
      std::snprintf(stem, sizeof stem, "%s_%05d", to_string(split).c_str(), i);
      ManifestEntry entry;
      entry.split = split;
      entry.image = out_dir / "lines" / (std::string(stem) + ".png");
      write_png_gray(entry.image, gray);
      if (split != Split::kPretrain) {
        entry.transcript = out_dir / "lines" / (std::string(stem) + ".txt");
        std::ofstream t(entry.transcript, std::ios::binary);
        if (!t) throw IoError("cannot write transcript '" + entry.transcript.string() + "'");
        t << codepoints_to_utf8(text) << '\n';
      }
      part.entries.push_back(entry);
      all.entries.push_back(std::move(entry));
    }
    write_manifest(out_dir / (to_string(split) + ".tsv"), part);
  }
  write_manifest(out_dir / "manifest.tsv", all);
  return all;
}

}  // namespace lacuna
